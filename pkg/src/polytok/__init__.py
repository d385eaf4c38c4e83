"""polytok: multilingual tokenizer engineering toolkit."""

__version__ = "0.1.0"

from .adaptation import (  # noqa: F401
    AdaptationPlan,
    EmbeddingTable,
    MeanInit,
    RandomInit,
    adaptation_report,
    apply_adaptation,
    load_embeddings,
    load_plan,
    plan_adaptation,
    save_embeddings,
    save_plan,
)
from .bpe import (  # noqa: F401
    DEFAULT_SPECIAL_TOKENS,
    Encoding,
    Tokenizer,
    TrainConfig,
    train,
)
from .compression import CompressionReport, compression, compression_ratio  # noqa: F401
from .errors import PolytokError  # noqa: F401
from .metrics import (  # noqa: F401
    AdaptationCurve,
    JudgePrompt,
    VerdictRecord,
    WinRateReport,
    emit_judge_prompt,
    parse_verdict,
    speedup_factor,
    win_rate,
)
from .pretokenize import O200K_PATTERN, pretokenize, pretokenize_str  # noqa: F401
from .registry import (  # noqa: F401
    Bucket,
    LanguageSpec,
    Registry,
    build_registry,
    derive_buckets,
    load_registry,
)
from .sampling import CorpusStore, draw_sample  # noqa: F401
from .weighting import (  # noqa: F401
    SamplePlan,
    WeightTable,
    compute_weights,
    make_sample_plan,
)
