"""Strategy encodings and their validation.

A strategy is described by slot letters saying what the evaluator does on
each premise of its abstraction and application rules:

* uniform evaluators: three slots over {I, S} (identity or self-call) for
  the abstraction body (la), the operand of a contraction (ar1), and the
  operand of a neutral (ar2). `ISS` is call-by-value, `III` call-by-name.
* hybrid evaluators `X<>Y`: a triple over {I, S, H} on the left (S calls
  the subsidiary, H the hybrid itself) over a uniform subsidiary Y on the
  right. The operator premise always runs the subsidiary first and the
  hybrid on the surviving neutral.
* readback encodings `X1X2.Y`: a staged strategy, uniform eval Y followed
  by a readback pass whose body/operand slots are over {I, E, R, (RE)}
  (identity, call eval, recurse readback, eval then readback). The
  neutral-operator premise of readback is always a readback recursion.

validate() classifies an encoding: the valid kinds, the degenerate ones
that collapse to a uniform evaluator, the spurious hybrids whose extra
structure adds no evaluation, and invalid readbacks. fuse() rewrites a
staged readback into its one-step-equivalent hybrid; defuse() inverts
that when possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .terms import FormClass


class NotationError(ValueError):
    """Raised for unparseable or structurally impossible encodings."""


@dataclass(frozen=True)
class UniformSpec:
    la: str
    ar1: str
    ar2: str

    def __post_init__(self):
        for slot in (self.la, self.ar1, self.ar2):
            if slot not in ("I", "S"):
                raise NotationError(f"uniform slot must be I or S, got {slot!r}")

    @property
    def triple(self):
        return (self.la, self.ar1, self.ar2)


@dataclass(frozen=True)
class HybridSpec:
    la: str
    ar1: str
    ar2: str
    subsidiary: UniformSpec

    def __post_init__(self):
        for slot in (self.la, self.ar1, self.ar2):
            if slot not in ("I", "S", "H"):
                raise NotationError(f"hybrid slot must be I, S or H, got {slot!r}")

    @property
    def triple(self):
        return (self.la, self.ar1, self.ar2)


@dataclass(frozen=True)
class ReadbackSpec:
    la: str
    ar2: str
    ev: UniformSpec

    def __post_init__(self):
        for slot in (self.la, self.ar2):
            if slot not in ("I", "E", "R", "RE"):
                raise NotationError(
                    f"readback slot must be I, E, R or (RE), got {slot!r}"
                )


StrategySpec = UniformSpec | HybridSpec | ReadbackSpec


ALIASES: dict[str, str] = {
    "bn": "III",
    "bv": "ISS",
    "ao": "SSS",
    "he": "SII",
    "ho": "SSI",
    "no": "HIH<>III",
    "hr": "HII<>III",
    "sn": "HSH<>ISS",
    "hn": "HIH<>SII",
    "ha": "HHH<>ISS",
    "am": "HSS<>ISS",
    "so": "HHH<>SSI",
    "bs": "HSH<>SSI",
    "byValue": "(RE)R.ISS",
    "byName": "R(RE).SII",
}

_UNIFORM_RE = re.compile(r"^[IS]{3}$")
_HYBRID_RE = re.compile(r"^([ISH]{3})<>([IS]{3})$")
_READBACK_RE = re.compile(r"^(\(RE\)|[IER])(\(RE\)|[IER])\.([IS]{3})$")


def _slot_from_text(s: str) -> str:
    return "RE" if s == "(RE)" else s


def parse_spec(text: str) -> StrategySpec:
    """Parse an alias or systematic encoding. Aliases are case-sensitive."""
    s = text.strip()
    s = ALIASES.get(s, s)
    if _UNIFORM_RE.match(s):
        return UniformSpec(*s)
    m = _HYBRID_RE.match(s)
    if m:
        left, right = m.group(1), m.group(2)
        return HybridSpec(left[0], left[1], left[2], UniformSpec(*right))
    m = _READBACK_RE.match(s)
    if m:
        return ReadbackSpec(
            _slot_from_text(m.group(1)),
            _slot_from_text(m.group(2)),
            UniformSpec(*m.group(3)),
        )
    raise NotationError(
        f"cannot parse strategy {text!r}; expected an alias, a uniform triple "
        "like ISS, a hybrid like HSH<>ISS, or a readback like (RE)R.ISS"
    )


def _slot_text(slot: str) -> str:
    return "(RE)" if slot == "RE" else slot


def print_spec(spec: StrategySpec) -> str:
    """Systematic (alias-free) rendering; round-trips with parse_spec."""
    if isinstance(spec, UniformSpec):
        return spec.la + spec.ar1 + spec.ar2
    if isinstance(spec, HybridSpec):
        return f"{spec.la}{spec.ar1}{spec.ar2}<>{print_spec(spec.subsidiary)}"
    if isinstance(spec, ReadbackSpec):
        return f"{_slot_text(spec.la)}{_slot_text(spec.ar2)}.{print_spec(spec.ev)}"
    raise NotationError(f"not a strategy spec: {spec!r}")


_ALIAS_BY_SYSTEMATIC = {v: k for k, v in ALIASES.items()}


def alias_of(spec: StrategySpec) -> str | None:
    """The short alias for spec, if one exists."""
    return _ALIAS_BY_SYSTEMATIC.get(print_spec(spec))


@dataclass(frozen=True)
class Diagnostic:
    proviso: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    spec: StrategySpec
    verdict: str
    diagnostics: tuple[Diagnostic, ...] = field(default_factory=tuple)


VERDICTS = (
    "valid-uniform",
    "valid-hybrid-balanced",
    "valid-hybrid-unbalanced",
    "valid-readback",
    "degenerate-uniform",
    "spurious",
    "invalid",
)


def validate(spec: StrategySpec | str) -> ValidationReport:
    """Check an encoding against the hybrid/readback provisos.

    Verdicts: the three valid evaluator kinds plus valid-readback;
    degenerate-uniform for hybrids that merely restate a uniform
    evaluator; spurious for hybrids violating a proviso; invalid for
    readbacks that are vacuous or incompatible with their eval stage.
    """
    if isinstance(spec, str):
        spec = parse_spec(spec)
    if isinstance(spec, UniformSpec):
        return ValidationReport(spec, "valid-uniform")
    if isinstance(spec, HybridSpec):
        return _validate_hybrid(spec)
    return _validate_readback(spec)


def _validate_hybrid(spec: HybridSpec) -> ValidationReport:
    sub = spec.subsidiary
    if "H" not in spec.triple and spec.triple == sub.triple:
        return ValidationReport(
            spec,
            "degenerate-uniform",
            (
                Diagnostic(
                    "H2",
                    f"defines uniform {print_spec(sub)}: every slot repeats "
                    "the subsidiary, so no premise exceeds it",
                ),
            ),
        )
    diags = []
    # The slot order is {id} <= {id, su, hy} and {su} <= {su, hy}: the
    # hybrid may never evaluate a premise less than its subsidiary does.
    for label, hslot, sslot in (("la", spec.la, sub.la), ("ar2", spec.ar2, sub.ar2)):
        if sslot == "S" and hslot == "I":
            diags.append(
                Diagnostic(
                    "H2",
                    f"{label}: hybrid is the identity where the subsidiary "
                    "calls itself",
                )
            )
    if sub.ar1 == "I" and spec.ar1 != "I":
        diags.append(
            Diagnostic(
                "H3",
                "ar1: a non-strict subsidiary requires the identity on the "
                "contraction operand",
            )
        )
    if sub.ar1 == "S" and spec.ar1 == "I":
        diags.append(
            Diagnostic(
                "H3",
                "ar1: a strict subsidiary requires the hybrid to evaluate "
                "the contraction operand at least as much",
            )
        )
    if "H" not in (spec.la, spec.ar2):
        diags.append(
            Diagnostic(
                "H2",
                "no la or ar2 premise calls the hybrid, so the encoding "
                "cannot evaluate past its subsidiary",
            )
        )
    elif not any(
        s == "I" and h in ("S", "H")
        for h, s in ((spec.la, sub.la), (spec.ar2, sub.ar2))
    ):
        diags.append(
            Diagnostic(
                "H2",
                "no la or ar2 premise evaluates where the subsidiary is the "
                "identity, so the hybrid adds no evaluation",
            )
        )
    if diags:
        return ValidationReport(spec, "spurious", tuple(diags))
    if spec.triple == ("I", "I", "H") and sub.triple == ("I", "I", "I"):
        return ValidationReport(
            spec,
            "degenerate-uniform",
            (
                Diagnostic(
                    "degenerate",
                    "defines uniform IIS: the provisos hold, but the hybrid "
                    "pass over neutral operands evaluates exactly what IIS "
                    "already evaluates",
                ),
            ),
        )
    kind = (
        "valid-hybrid-balanced" if spec.ar1 == sub.ar1 else "valid-hybrid-unbalanced"
    )
    return ValidationReport(spec, kind)


# Which readback slots may sit over which eval slots: where eval already
# evaluated (S), readback may only skip or recurse; where eval was the
# identity (I), readback may skip, evaluate, or do both.
_RB_OVER_EVAL = {"I": ("I", "E", "RE"), "S": ("I", "R")}


def _validate_readback(spec: ReadbackSpec) -> ValidationReport:
    ev = spec.ev
    diags = []
    pairs = (("la", spec.la, ev.la), ("ar2", spec.ar2, ev.ar2))
    for label, rslot, eslot in pairs:
        if rslot not in _RB_OVER_EVAL[eslot]:
            diags.append(
                Diagnostic(
                    "ER2",
                    f"{label}: readback slot {_slot_text(rslot)} cannot sit "
                    f"over eval slot {eslot}",
                )
            )
    if not any(
        eslot == "I" and rslot in ("E", "RE") for _, rslot, eslot in pairs
    ):
        diags.append(
            Diagnostic(
                "ER2",
                "readback never calls eval on a premise where eval was the "
                "identity, so the staging is vacuous",
            )
        )
    if not any(rslot in ("R", "RE") for _, rslot, _e in pairs):
        diags.append(
            Diagnostic(
                "ER2",
                "readback never recurses on a body or operand premise",
            )
        )
    if diags:
        return ValidationReport(spec, "invalid", tuple(diags))
    return ValidationReport(spec, "valid-readback")


@dataclass(frozen=True)
class FusionResult:
    hybrid: HybridSpec
    mcr: bool


# compose(readback slot, eval slot) -> hybrid slot: sequencing the eval
# stage's action with the readback stage's action on the same premise.
_COMPOSE = {
    ("I", "I"): "I",
    ("E", "I"): "S",
    ("RE", "I"): "H",
    ("I", "S"): "S",
    ("R", "S"): "H",
}

_DECOMPOSE = {(h, e): r for (r, e), h in _COMPOSE.items()}


def fuse(spec: ReadbackSpec | str) -> FusionResult:
    """The hybrid evaluator one-step-equivalent to a staged readback.

    Each hybrid slot is the composition of the readback slot over the
    eval slot; ar1 and the subsidiary are the eval triple itself. The
    equivalence is modulo commuting redexes exactly when the eval stage
    evaluates neutral operands (ar2 = S), because the readback stage then
    revisits operands the eval stage already ordered differently.
    """
    if isinstance(spec, str):
        spec = parse_spec(spec)
    if not isinstance(spec, ReadbackSpec):
        raise NotationError(f"fuse needs a readback encoding, got {print_spec(spec)}")
    report = validate(spec)
    if report.verdict != "valid-readback":
        raise NotationError(
            f"cannot fuse {print_spec(spec)}: {report.verdict}"
            + "".join(f"; {d.proviso}: {d.message}" for d in report.diagnostics)
        )
    ev = spec.ev
    hybrid = HybridSpec(
        _COMPOSE[(spec.la, ev.la)],
        ev.ar1,
        _COMPOSE[(spec.ar2, ev.ar2)],
        ev,
    )
    return FusionResult(hybrid, mcr=ev.ar2 == "S")


def defuse(spec: HybridSpec | str) -> frozenset[ReadbackSpec]:
    """Readback encodings that fuse to the given hybrid.

    Only structurally balanced hybrids (ar1 equal to the subsidiary's)
    decompose; unbalanced ones return the empty set, as do hybrids whose
    slot/subsidiary pairing has no readback preimage.
    """
    if isinstance(spec, str):
        spec = parse_spec(spec)
    if not isinstance(spec, HybridSpec):
        raise NotationError(f"defuse needs a hybrid, got {print_spec(spec)}")
    sub = spec.subsidiary
    if spec.ar1 != sub.ar1:
        return frozenset()
    la = _DECOMPOSE.get((spec.la, sub.la))
    ar2 = _DECOMPOSE.get((spec.ar2, sub.ar2))
    if la is None or ar2 is None:
        return frozenset()
    rb = ReadbackSpec(la, ar2, sub)
    if validate(rb).verdict != "valid-readback":
        return frozenset()
    return frozenset((rb,))


@dataclass(frozen=True)
class CatalogueEntry:
    alias: str | None
    spec: StrategySpec
    classification: str
    result_form: FormClass


_NF = FormClass.NF
_WNF = FormClass.WNF
_HNF = FormClass.HNF
_WHNF = FormClass.WHNF
_VHNF = FormClass.VHNF

_UNIFORM_ROWS = (
    ("bn", "III", _WHNF),
    (None, "IIS", _WNF),
    ("he", "SII", _HNF),
    (None, "SIS", _NF),
    (None, "ISI", _WHNF),
    ("bv", "ISS", _WNF),
    ("ho", "SSI", _HNF),
    ("ao", "SSS", _NF),
)

_HYBRID_ROWS = (
    # over bn
    (None, "IIH<>III", "uniform", _WNF),
    (None, "SIH<>III", "hybrid balanced", _WNF),
    ("hr", "HII<>III", "hybrid balanced", _HNF),
    (None, "HIS<>III", "hybrid balanced", _VHNF),
    ("no", "HIH<>III", "hybrid balanced", _NF),
    # over IIS
    (None, "SIH<>IIS", "hybrid balanced", _WNF),
    (None, "HIS<>IIS", "hybrid balanced", _VHNF),
    (None, "HIH<>IIS", "hybrid balanced", _NF),
    # over he
    (None, "SIH<>SII", "hybrid balanced", _WNF),
    (None, "HIS<>SII", "hybrid balanced", _HNF),
    ("hn", "HIH<>SII", "hybrid balanced", _NF),
    # over ISI, balanced
    (None, "ISH<>ISI", "hybrid balanced", _WNF),
    (None, "SSH<>ISI", "hybrid balanced", _WNF),
    (None, "HSI<>ISI", "hybrid balanced", _HNF),
    (None, "HSS<>ISI", "hybrid balanced", _VHNF),
    (None, "HSH<>ISI", "hybrid balanced", _NF),
    # over bv, balanced
    (None, "SSH<>ISS", "hybrid balanced", _WNF),
    ("am", "HSS<>ISS", "hybrid balanced", _VHNF),
    ("sn", "HSH<>ISS", "hybrid balanced", _NF),
    # over ho, balanced
    (None, "SSH<>SSI", "hybrid balanced", _WNF),
    (None, "HSS<>SSI", "hybrid balanced", _HNF),
    ("bs", "HSH<>SSI", "hybrid balanced", _NF),
    # over ISI, unbalanced
    (None, "IHH<>ISI", "hybrid unbalanced", _WNF),
    (None, "SHH<>ISI", "hybrid unbalanced", _WNF),
    (None, "HHI<>ISI", "hybrid unbalanced", _HNF),
    (None, "HHS<>ISI", "hybrid unbalanced", _VHNF),
    (None, "HHH<>ISI", "hybrid unbalanced", _NF),
    # over bv, unbalanced
    (None, "SHH<>ISS", "hybrid unbalanced", _WNF),
    (None, "HHS<>ISS", "hybrid unbalanced", _VHNF),
    ("ha", "HHH<>ISS", "hybrid unbalanced", _NF),
    # over ho, unbalanced
    (None, "SHH<>SSI", "hybrid unbalanced", _WNF),
    (None, "HHS<>SSI", "hybrid unbalanced", _HNF),
    ("so", "HHH<>SSI", "hybrid unbalanced", _NF),
)

_READBACK_ROWS = (
    # over bn
    (None, "I(RE).III", _WNF),
    (None, "E(RE).III", _WNF),
    (None, "(RE)I.III", _HNF),
    (None, "(RE)E.III", _VHNF),
    (None, "(RE)(RE).III", _NF),
    # over IIS
    (None, "ER.IIS", _WNF),
    (None, "(RE)I.IIS", _VHNF),
    (None, "(RE)R.IIS", _NF),
    # over he
    (None, "I(RE).SII", _WNF),
    (None, "RE.SII", _HNF),
    ("byName", "R(RE).SII", _NF),
    # over ISI
    (None, "I(RE).ISI", _WNF),
    (None, "E(RE).ISI", _WNF),
    (None, "(RE)I.ISI", _HNF),
    (None, "(RE)E.ISI", _VHNF),
    (None, "(RE)(RE).ISI", _NF),
    # over bv
    (None, "ER.ISS", _WNF),
    (None, "(RE)I.ISS", _VHNF),
    ("byValue", "(RE)R.ISS", _NF),
    # over ho
    (None, "I(RE).SSI", _WNF),
    (None, "RE.SSI", _HNF),
    (None, "R(RE).SSI", _NF),
)


def catalogue() -> tuple[CatalogueEntry, ...]:
    """Every named or systematic strategy of the survey tables.

    8 uniform evaluators, 33 hybrids, 22 readback encodings, each with
    its classification and the form family its converged results land in.
    """
    rows = []
    for alias, text, form in _UNIFORM_ROWS:
        rows.append(CatalogueEntry(alias, parse_spec(text), "uniform", form))
    for alias, text, classification, form in _HYBRID_ROWS:
        rows.append(CatalogueEntry(alias, parse_spec(text), classification, form))
    for alias, text, form in _READBACK_ROWS:
        rows.append(CatalogueEntry(alias, parse_spec(text), "readback", form))
    return tuple(rows)
