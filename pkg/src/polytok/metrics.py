"""Judge-prompt emission, verdict aggregation, and adaptation-speed factors.

This module never calls a model: its boundary is prompt files out, verdict
files in. Win rates count ties in the denominator (win_rate = wins / total),
a conservative convention that is stated in every report header.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import MetricsError

JUDGE_SYSTEM_PROMPT = (
    "You are a helpful following assistant whose goal is to select the "
    "preferred (least wrong) output for a given instruction."
)

JUDGE_USER_TEMPLATE = """Which of the following answers is the best one for the given instruction? A good answer should follow these rules:
1) It should have correct reasoning,"
2) It should answer the request in the instruction,
3) It should be factually correct and semantically comprehensible,
4) It should be grammatically correct and fluent.

Instruction: {instruction}
Answer (A): {completion_a}
Answer (B): {completion_b}

FIRST provide a concise comparison of the two answers. If one answer is better, explain which you prefer and why. If both answers are identical or equally good or bad, explain why. SECOND, on a new line, state exactly one of 'Answer (A)' or 'Answer (B)' or 'TIE' to indicate your choice of preferred response.
Your response should use the format: Comparison: <concise comparison and explanation> Preferred: <'Answer (A)' or 'Answer (B)' or 'TIE'>."""

# template split once at import; slot values are never re-scanned, so a slot
# containing a literal "{instruction}" is emitted verbatim
_HEAD, _rest = JUDGE_USER_TEMPLATE.split("{instruction}")
_MID_A, _rest = _rest.split("{completion_a}")
_MID_B, _TAIL = _rest.split("{completion_b}")

VERDICTS = ("A", "B", "TIE")

_LITERALS = {"Answer (A)": "A", "Answer (B)": "B", "TIE": "TIE"}


@dataclass(frozen=True)
class JudgePrompt:
    system: str
    user: str


@dataclass(frozen=True)
class VerdictRecord:
    example_id: str
    iso_code: str
    verdict: str  # one of VERDICTS
    judge_raw: str | None = None


@dataclass(frozen=True)
class LanguageTally:
    wins: int
    losses: int
    ties: int
    unparseable: int = 0

    @property
    def total(self) -> int:
        return self.wins + self.losses + self.ties

    @property
    def win_rate(self) -> float:
        return self.wins / self.total if self.total else 0.0


@dataclass(frozen=True)
class WinRateReport:
    per_language: dict[str, LanguageTally]
    subset_averages: dict[str, float]
    candidate: str


@dataclass(frozen=True)
class AdaptationCurve:
    points: tuple[tuple[int, float], ...]
    label: str = ""

    def __post_init__(self):
        if not self.points:
            raise MetricsError(f"curve {self.label!r} has no points")
        steps = [s for s, _ in self.points]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise MetricsError(f"curve {self.label!r} steps must be strictly increasing")


@dataclass(frozen=True)
class SpeedupResult:
    factor: float
    threshold: float
    candidate_step: float
    baseline_step: int


def emit_judge_prompt(
    instruction: str, completion_a: str, completion_b: str
) -> JudgePrompt:
    """Instantiate the pairwise judge template; single-pass substitution."""
    user = _HEAD + instruction + _MID_A + completion_a + _MID_B + completion_b + _TAIL
    return JudgePrompt(system=JUDGE_SYSTEM_PROMPT, user=user)


def parse_verdict(raw: str) -> str:
    """Extract the final `Preferred:` decision; exact-match of the three
    literals only."""
    idx = raw.rfind("Preferred:")
    if idx < 0:
        raise MetricsError(f"no 'Preferred:' marker in judge output: {raw[:80]!r}")
    tail = raw[idx + len("Preferred:"):].split("\n", 1)[0].strip()
    if tail in _LITERALS:
        return _LITERALS[tail]
    raise MetricsError(f"unparseable verdict {tail!r}")


def win_rate(
    verdicts: Iterable[VerdictRecord],
    subsets: Mapping[str, Iterable[str]] | None = None,
    candidate: str = "A",
    unparseable: Mapping[str, int] | None = None,
) -> WinRateReport:
    """Aggregate verdicts into per-language tallies and subset averages.

    `candidate` names the answer slot the candidate system occupied; ties
    count in the denominator but as neither win nor loss.
    """
    if candidate not in ("A", "B"):
        raise MetricsError(f"candidate must be 'A' or 'B', got {candidate!r}")
    records = list(verdicts)
    if not records:
        raise MetricsError("verdict set is empty")
    opponent = "B" if candidate == "A" else "A"
    tallies: dict[str, dict[str, int]] = {}
    for record in records:
        if record.verdict not in VERDICTS:
            raise MetricsError(f"bad verdict {record.verdict!r} for {record.example_id}")
        t = tallies.setdefault(record.iso_code, {"wins": 0, "losses": 0, "ties": 0})
        if record.verdict == candidate:
            t["wins"] += 1
        elif record.verdict == opponent:
            t["losses"] += 1
        else:
            t["ties"] += 1
    unparseable = dict(unparseable or {})
    per_language = {
        code: LanguageTally(
            wins=t["wins"],
            losses=t["losses"],
            ties=t["ties"],
            unparseable=unparseable.get(code, 0),
        )
        for code, t in sorted(tallies.items())
    }
    subset_averages: dict[str, float] = {}
    for name, members in sorted((subsets or {}).items()):
        rates = [per_language[m].win_rate for m in members if m in per_language]
        if rates:
            subset_averages[name] = sum(rates) / len(rates)
    return WinRateReport(
        per_language=per_language, subset_averages=subset_averages, candidate=candidate
    )


def speedup_factor(candidate: AdaptationCurve, baseline: AdaptationCurve) -> SpeedupResult:
    """How much earlier the candidate reaches the baseline's final win rate.

    The threshold is the baseline's final value; the candidate's crossing
    step is found by linear interpolation between bracketing checkpoints.
    """
    baseline_step, threshold = baseline.points[-1]
    crossing: float | None = None
    prev_step, prev_rate = candidate.points[0]
    if prev_rate >= threshold:
        crossing = float(prev_step)
    else:
        for step, rate in candidate.points[1:]:
            if rate >= threshold:
                frac = (threshold - prev_rate) / (rate - prev_rate)
                crossing = prev_step + frac * (step - prev_step)
                break
            prev_step, prev_rate = step, rate
    if crossing is None:
        best = max(rate for _, rate in candidate.points)
        raise MetricsError(
            f"candidate never reaches the baseline threshold "
            f"({best:.6g} < {threshold:.6g})"
        )
    if crossing <= 0:
        raise MetricsError(f"candidate crossing step must be positive, got {crossing}")
    return SpeedupResult(
        factor=baseline_step / crossing,
        threshold=threshold,
        candidate_step=crossing,
        baseline_step=baseline_step,
    )


# --- file formats ---------------------------------------------------------
# Verdict file: example_id<TAB>iso_code<TAB>raw_judge_output, with backslash
# escaping of tab/newline/return in the raw field. Curve file: step<TAB>rate
# lines. Prompt batch input: example_id<TAB>iso_code<TAB>instruction<TAB>
# completion_a<TAB>completion_b, escaped the same way.


def escape_field(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def unescape_field(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(c)
        i += 1
    return "".join(out)


def read_verdict_file(path: str | Path) -> tuple[list[VerdictRecord], dict[str, int]]:
    """Parse a verdict file; unparseable verdicts are kept out of the record
    list and counted per language."""
    records: list[VerdictRecord] = []
    unparseable: dict[str, int] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MetricsError(f"verdict file line {lineno}: expected 3 fields")
        example_id, iso_code, raw = fields[0], fields[1], unescape_field(fields[2])
        try:
            verdict = parse_verdict(raw)
        except MetricsError:
            unparseable[iso_code] = unparseable.get(iso_code, 0) + 1
            continue
        records.append(
            VerdictRecord(
                example_id=example_id, iso_code=iso_code, verdict=verdict, judge_raw=raw
            )
        )
    return records, unparseable


def read_curve(path: str | Path, label: str = "") -> AdaptationCurve:
    points: list[tuple[int, float]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise MetricsError(f"curve file line {lineno}: expected step<TAB>win_rate")
        points.append((int(fields[0]), float(fields[1])))
    return AdaptationCurve(points=tuple(points), label=label or str(path))


def write_winrate_report(report: WinRateReport, path: str | Path) -> None:
    lines = [
        "# win_rate = wins / (wins + losses + ties); ties count in the denominator",
        f"# candidate occupies Answer ({report.candidate})",
    ]
    for code, tally in sorted(report.per_language.items()):
        lines.append(
            f"{code}\t{tally.wins}\t{tally.losses}\t{tally.ties}\t{tally.unparseable}"
            f"\t{format(tally.win_rate, '.17g')}"
        )
    for name, avg in sorted(report.subset_averages.items()):
        lines.append(f"SUBSET\t{name}\t{format(avg, '.17g')}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
