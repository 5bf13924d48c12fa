"""The two generic evaluators, instantiated from a strategy encoding.

One machine runs everything. A strategy compiles to a small graph of
"layers", one per recursion flavour (a uniform evaluator is one
self-referential layer; a hybrid is a hybrid layer over a subsidiary
layer), and the machine walks the term with an explicit frame stack so
that deep or divergent terms can never overflow the Python stack. A
readback encoding runs its eval stage first, then a readback walk over
the intermediate result, both drawing on the same fuel budget and
appending to the same trace.

Each beta contraction costs one unit of fuel and is recorded as a
TraceEvent carrying the redex's address in the whole term at the moment
of contraction. Operator premises extend the address with F, operand
premises with A, abstraction bodies with B; the contractum stays at the
redex's own address. That makes a trace replayable: rewriting each
recorded redex in place, in order, reproduces the run (see
reconstruct_sequence).
"""

from __future__ import annotations

from dataclasses import dataclass

from .notation import (
    HybridSpec,
    ReadbackSpec,
    StrategySpec,
    UniformSpec,
    parse_spec,
    print_spec,
    validate,
)
from .terms import (
    App,
    Lam,
    ResourceLimitError,
    Term,
    Var,
    parse_term,
    substitute,
)

CONVERGED = "converged"
FUEL_EXHAUSTED = "fuel-exhausted"

DEFAULT_FUEL = 100000
DEFAULT_MAX_NODES = 1_000_000
DEFAULT_MAX_FRAMES = 2_000_000


class EngineError(ValueError):
    """Raised for strategies the engine refuses and for broken replays."""


class TraceEvent:
    """One beta contraction: its address, redex, and contractum."""

    __slots__ = ("step_index", "position", "redex", "contractum")

    def __init__(self, step_index, position, redex, contractum):
        self.step_index = step_index
        self.position = position
        self.redex = redex
        self.contractum = contractum

    def __repr__(self):
        pos = "".join(self.position) or "root"
        return f"TraceEvent({self.step_index}, {pos}, {self.redex!r} -> {self.contractum!r})"

    def __eq__(self, other):
        if not isinstance(other, TraceEvent):
            return NotImplemented
        return (
            self.step_index == other.step_index
            and self.position == other.position
            and self.redex == other.redex
            and self.contractum == other.contractum
        )


@dataclass(frozen=True)
class Outcome:
    """Result of a fuel-bounded run. trace is None when recording was off."""

    status: str
    result: Term | None
    trace: tuple[TraceEvent, ...] | None
    fuel_used: int


class DerivationNode:
    """A node of the natural-semantics derivation tree.

    kind is VAR, ABS, CON, or NEU; premises are the child derivations in
    rule order. A CON node additionally carries the contraction's trace
    event, the evaluated operand, and the contractum; its final premise
    is the continued evaluation of the contractum, so an in-order walk
    (premises before the event, the event, then the continuation) visits
    contractions in trace order.
    """

    __slots__ = ("kind", "input", "output", "premises", "event",
                 "operand_result", "contractum")

    def __init__(self, kind, input_term):
        self.kind = kind
        self.input = input_term
        self.output = None
        self.premises = []
        self.event = None
        self.operand_result = None
        self.contractum = None

    def __repr__(self):
        return f"DerivationNode({self.kind}, {self.input!r} => {self.output!r})"


class _Layer:
    """Recursion behaviour of one evaluator: each slot is None for the
    identity or the layer to recurse with."""

    __slots__ = ("la", "ar1", "ar2", "op1", "op2")


def _build_layer(spec) -> _Layer:
    if isinstance(spec, UniformSpec):
        u = _Layer()
        u.la = u if spec.la == "S" else None
        u.ar1 = u if spec.ar1 == "S" else None
        u.ar2 = u if spec.ar2 == "S" else None
        u.op1 = u
        u.op2 = None
        return u
    sub = _build_layer(spec.subsidiary)
    h = _Layer()
    pick = {"I": None, "S": sub, "H": h}
    h.la = pick[spec.la]
    h.ar1 = pick[spec.ar1]
    h.ar2 = pick[spec.ar2]
    h.op1 = sub
    h.op2 = h
    return h


_RUNNABLE = (
    "valid-uniform",
    "valid-hybrid-balanced",
    "valid-hybrid-unbalanced",
    "valid-readback",
    "degenerate-uniform",
)


def _coerce_spec(spec) -> StrategySpec:
    if isinstance(spec, str):
        spec = parse_spec(spec)
    report = validate(spec)
    if report.verdict not in _RUNNABLE:
        detail = "; ".join(f"{d.proviso}: {d.message}" for d in report.diagnostics)
        raise EngineError(
            f"cannot run {print_spec(spec)} ({report.verdict}): {detail}"
        )
    return spec


def _coerce_term(term) -> Term:
    return parse_term(term) if isinstance(term, str) else term


class _OutOfFuel(Exception):
    pass


# Frame opcodes. EV walks a term under a layer; AP1 dispatches on the
# evaluated operator; CON2 contracts once the operand premise is done;
# NEU1/NEU2 finish a neutral. RB and friends drive the readback walk.
_EV = 0
_MKLAM = 1
_AP1 = 2
_CON2 = 3
_NEU1 = 4
_NEU2 = 5
_SETOUT = 6
_RB = 7
_RBAFTER = 8
_RBAPP = 9
_RBAPP2 = 10


class _Machine:
    def __init__(self, fuel, record_trace, max_nodes, max_frames, trees=False):
        self.fuel = fuel
        self.record = record_trace or trees
        self.trees = trees
        self.events = [] if self.record else None
        self.alloc = [max_nodes]
        self.max_frames = max_frames
        self.frames = []
        self.values = []
        self.step_offset = 0
        self._ptup = {}
        self.rb_la = None
        self.rb_ar2 = None
        self.ev_layer = None

    def path_tuple(self, path):
        # Paths live on the frame stack as cons cells (letter, parent);
        # they only become tuples when an event is recorded. The memo is
        # keyed by id, so it must also hold the cell to pin it alive.
        if path is None:
            return ()
        memo = self._ptup
        got = memo.get(id(path))
        if got is not None and got[0] is path:
            return got[1]
        letters = []
        p = path
        base = ()
        while p is not None:
            g = memo.get(id(p))
            if g is not None and g[0] is p:
                base = g[1]
                break
            letters.append(p[0])
            p = p[1]
        tup = base + tuple(reversed(letters))
        memo[id(path)] = (path, tup)
        return tup

    def contract(self, lam, operand, path):
        if self.fuel == 0:
            raise _OutOfFuel
        self.fuel -= 1
        contractum = substitute(operand, lam.param, lam.body, self.alloc)
        event = None
        if self.record:
            event = TraceEvent(
                self.step_offset + len(self.events),
                self.path_tuple(path),
                App(lam, operand),
                contractum,
            )
            self.events.append(event)
        return contractum, event

    def push_rb_slot(self, slot, term, path, sink):
        # Slot actions of the readback walk: I skips, E runs the eval
        # stage on the subterm, R recurses, RE does both at one address.
        frames = self.frames
        if slot == "I":
            self.values.append(term)
        elif slot == "E":
            frames.append((_EV, self.ev_layer, term, path, sink))
        elif slot == "R":
            frames.append((_RB, term, path, sink))
        else:
            frames.append((_RBAFTER, path, sink))
            frames.append((_EV, self.ev_layer, term, path, sink))

    def run(self):
        frames = self.frames
        values = self.values
        trees = self.trees
        max_frames = self.max_frames
        while frames:
            frame = frames.pop()
            op = frame[0]
            if op == _EV:
                _, layer, t, path, sink = frame
                if len(frames) > max_frames:
                    raise ResourceLimitError("machine frame stack limit exceeded")
                cls = t.__class__
                if cls is Var:
                    values.append(t)
                    if trees:
                        leaf = DerivationNode("VAR", t)
                        leaf.output = t
                        sink.append(leaf)
                elif cls is Lam:
                    la = layer.la
                    if la is None:
                        values.append(t)
                        if trees:
                            leaf = DerivationNode("ABS", t)
                            leaf.output = t
                            sink.append(leaf)
                    else:
                        node = None
                        if trees:
                            node = DerivationNode("ABS", t)
                            sink.append(node)
                            sink = node.premises
                        frames.append((_MKLAM, t, node))
                        frames.append((_EV, la, t.body, ("B", path), sink))
                else:
                    node = None
                    if trees:
                        node = DerivationNode("APP", t)
                        sink.append(node)
                        sink = node.premises
                    frames.append((_AP1, layer, t, path, node))
                    frames.append((_EV, layer.op1, t.operator, ("F", path), sink))
            elif op == _MKLAM:
                _, src, node = frame
                body = values.pop()
                out = src if body is src.body else Lam(src.param, body)
                values.append(out)
                if node is not None:
                    node.output = out
            elif op == _AP1:
                _, layer, appnode, path, node = frame
                mprime = values.pop()
                if mprime.__class__ is Lam:
                    if node is not None:
                        node.kind = "CON"
                    ar1 = layer.ar1
                    if ar1 is None:
                        self._contract_go(layer, mprime, appnode.operand, path, node)
                    else:
                        frames.append((_CON2, layer, mprime, path, node))
                        sink = node.premises if node is not None else None
                        frames.append((_EV, ar1, appnode.operand, ("A", path), sink))
                else:
                    if node is not None:
                        node.kind = "NEU"
                    op2 = layer.op2
                    if op2 is None:
                        self._neu_ar2(layer, appnode, mprime, path, node)
                    else:
                        frames.append((_NEU1, layer, appnode, path, node))
                        sink = node.premises if node is not None else None
                        frames.append((_EV, op2, mprime, ("F", path), sink))
            elif op == _CON2:
                _, layer, lam, path, node = frame
                nprime = values.pop()
                self._contract_go(layer, lam, nprime, path, node)
            elif op == _NEU1:
                _, layer, appnode, path, node = frame
                mpp = values.pop()
                self._neu_ar2(layer, appnode, mpp, path, node)
            elif op == _NEU2:
                _, appnode, mpp, node = frame
                npp = values.pop()
                if mpp is appnode.operator and npp is appnode.operand:
                    out = appnode
                else:
                    out = App(mpp, npp)
                values.append(out)
                if node is not None:
                    node.output = out
            elif op == _SETOUT:
                frame[1].output = values[-1]
            elif op == _RB:
                _, t, path, sink = frame
                if len(frames) > max_frames:
                    raise ResourceLimitError("machine frame stack limit exceeded")
                cls = t.__class__
                if cls is Var:
                    values.append(t)
                    if trees:
                        leaf = DerivationNode("VAR", t)
                        leaf.output = t
                        sink.append(leaf)
                elif cls is Lam:
                    if self.rb_la == "I":
                        values.append(t)
                        if trees:
                            leaf = DerivationNode("ABS", t)
                            leaf.output = t
                            sink.append(leaf)
                    else:
                        node = None
                        if trees:
                            node = DerivationNode("ABS", t)
                            sink.append(node)
                            sink = node.premises
                        frames.append((_MKLAM, t, node))
                        self.push_rb_slot(self.rb_la, t.body, ("B", path), sink)
                else:
                    if t.operator.__class__ is Lam:
                        raise EngineError(
                            "readback applied to non-intermediate form: "
                            f"{t.operator!r} heads a redex"
                        )
                    node = None
                    if trees:
                        node = DerivationNode("NEU", t)
                        sink.append(node)
                        sink = node.premises
                    frames.append((_RBAPP, t, path, node))
                    frames.append((_RB, t.operator, ("F", path), sink))
            elif op == _RBAFTER:
                _, path, sink = frame
                v = values.pop()
                frames.append((_RB, v, path, sink))
            elif op == _RBAPP:
                _, appnode, path, node = frame
                mprime = values.pop()
                if mprime.__class__ is Lam:
                    raise EngineError(
                        "readback applied to non-intermediate form: "
                        "operator read back to an abstraction"
                    )
                if self.rb_ar2 == "I":
                    if mprime is appnode.operator:
                        out = appnode
                    else:
                        out = App(mprime, appnode.operand)
                    values.append(out)
                    if node is not None:
                        node.output = out
                else:
                    frames.append((_RBAPP2, appnode, mprime, node))
                    sink = node.premises if node is not None else None
                    self.push_rb_slot(self.rb_ar2, appnode.operand, ("A", path), sink)
            else:  # _RBAPP2
                _, appnode, mprime, node = frame
                nprime = values.pop()
                if mprime is appnode.operator and nprime is appnode.operand:
                    out = appnode
                else:
                    out = App(mprime, nprime)
                values.append(out)
                if node is not None:
                    node.output = out
        return values.pop()

    def _contract_go(self, layer, lam, operand, path, node):
        contractum, event = self.contract(lam, operand, path)
        if node is not None:
            node.event = event
            node.operand_result = operand
            node.contractum = contractum
            self.frames.append((_SETOUT, node))
            sink = node.premises
        else:
            sink = None
        self.frames.append((_EV, layer, contractum, path, sink))

    def _neu_ar2(self, layer, appnode, mpp, path, node):
        ar2 = layer.ar2
        if ar2 is None:
            if mpp is appnode.operator:
                out = appnode
            else:
                out = App(mpp, appnode.operand)
            self.values.append(out)
            if node is not None:
                node.output = out
        else:
            self.frames.append((_NEU2, appnode, mpp, node))
            sink = node.premises if node is not None else None
            self.frames.append((_EV, ar2, appnode.operand, ("A", path), sink))


def _run_machine(spec, term, fuel, record_trace, max_nodes, max_frames,
                 trees=False, stage1=None, fuel_already_used=0):
    """Shared driver. stage1 short-circuits a readback's eval stage with
    a precomputed intermediate term (the caller passes the fuel it cost
    and the events it produced via fuel_already_used / machine seeding)."""
    machine = _Machine(fuel - fuel_already_used, record_trace, max_nodes,
                       max_frames, trees)
    machine.step_offset = fuel_already_used
    eval_sink = [] if trees else None
    rb_sink = [] if trees else None
    exhausted = False
    result = None
    if isinstance(spec, ReadbackSpec):
        machine.ev_layer = _build_layer(spec.ev)
        machine.rb_la = spec.la
        machine.rb_ar2 = spec.ar2
        intermediate = stage1
        if intermediate is None:
            machine.frames.append((_EV, machine.ev_layer, term, None, eval_sink))
            try:
                intermediate = machine.run()
            except _OutOfFuel:
                exhausted = True
        if not exhausted:
            machine.frames.append((_RB, intermediate, None, rb_sink))
            try:
                result = machine.run()
            except _OutOfFuel:
                exhausted = True
    else:
        layer = _build_layer(spec)
        machine.frames.append((_EV, layer, term, None, eval_sink))
        try:
            result = machine.run()
        except _OutOfFuel:
            exhausted = True
    if machine.record:
        trace = tuple(machine.events)
    else:
        trace = None
    if exhausted:
        outcome = Outcome(FUEL_EXHAUSTED, None, trace, fuel)
    else:
        outcome = Outcome(CONVERGED, result, trace, fuel - machine.fuel)
    roots = None
    if trees:
        if exhausted:
            raise EngineError("fuel exhausted before the derivation completed")
        if isinstance(spec, ReadbackSpec):
            roots = (eval_sink[0], rb_sink[0]) if stage1 is None else (rb_sink[0],)
        else:
            roots = (eval_sink[0],)
    return outcome, roots


def evaluate(spec, term, fuel=DEFAULT_FUEL, *, record_trace=True,
             max_nodes=DEFAULT_MAX_NODES,
             max_frames=DEFAULT_MAX_FRAMES) -> Outcome:
    """Run a strategy on a term under a fuel budget.

    spec and term may be given as text. Every beta contraction consumes
    one fuel unit; on exhaustion the outcome keeps the trace produced so
    far and reports fuel_used equal to the budget. record_trace=False
    skips trace construction, which matters on large sweeps.
    """
    spec = _coerce_spec(spec)
    term = _coerce_term(term)
    if fuel < 0:
        raise EngineError("fuel budget must be nonnegative")
    outcome, _ = _run_machine(spec, term, fuel, record_trace, max_nodes, max_frames)
    return outcome


def _finish_readback(spec: ReadbackSpec, intermediate: Term, fuel: int,
                     fuel_already_used: int, *, record_trace=True,
                     max_nodes=DEFAULT_MAX_NODES,
                     max_frames=DEFAULT_MAX_FRAMES) -> Outcome:
    """Readback stage only, resuming after a cached eval stage.

    The returned trace covers the readback stage alone; step indices and
    fuel accounting continue from the eval stage's, so the caller can
    concatenate the stage traces."""
    outcome, _ = _run_machine(
        spec, None, fuel, record_trace, max_nodes, max_frames,
        stage1=intermediate, fuel_already_used=fuel_already_used,
    )
    return outcome


def derivation_tree(spec, term, fuel=DEFAULT_FUEL, *,
                    max_nodes=DEFAULT_MAX_NODES,
                    max_frames=DEFAULT_MAX_FRAMES) -> DerivationNode:
    """The natural-semantics derivation for a uniform or hybrid run.

    Readback strategies render as two stacked derivations; use
    derivation_forest for those."""
    spec = _coerce_spec(spec)
    if isinstance(spec, ReadbackSpec):
        raise EngineError(
            "a readback strategy derives as two stacked trees; "
            "use derivation_forest"
        )
    term = _coerce_term(term)
    _, roots = _run_machine(spec, term, fuel, True, max_nodes, max_frames,
                            trees=True)
    return roots[0]


def derivation_forest(spec, term, fuel=DEFAULT_FUEL, *,
                      max_nodes=DEFAULT_MAX_NODES,
                      max_frames=DEFAULT_MAX_FRAMES) -> tuple[DerivationNode, ...]:
    """Derivation trees for any strategy: one tree for an eval-apply
    evaluator, the eval tree stacked under the readback tree for a
    staged one."""
    spec = _coerce_spec(spec)
    term = _coerce_term(term)
    _, roots = _run_machine(spec, term, fuel, True, max_nodes, max_frames,
                            trees=True)
    return roots


def sequence_from_tree(tree: DerivationNode) -> tuple[TraceEvent, ...]:
    """Contractions of a derivation in in-order: for a CON node, the
    premises that produced the redex, then its own event, then the
    continuation."""
    out = []
    stack = [("n", tree)]
    while stack:
        tag, item = stack.pop()
        if tag == "e":
            out.append(item)
            continue
        if item.kind == "CON":
            stack.append(("n", item.premises[-1]))
            stack.append(("e", item.event))
            for p in reversed(item.premises[:-1]):
                stack.append(("n", p))
        else:
            for p in reversed(item.premises):
                stack.append(("n", p))
    return tuple(out)


def _subterm_spine(term: Term, position) -> list:
    spine = []
    node = term
    for letter in position:
        spine.append((node, letter))
        cls = node.__class__
        if letter == "F" and cls is App:
            node = node.operator
        elif letter == "A" and cls is App:
            node = node.operand
        elif letter == "B" and cls is Lam:
            node = node.body
        else:
            raise EngineError(
                f"position {''.join(position)} does not address a subterm"
            )
    spine.append((node, None))
    return spine


def reconstruct_sequence(term, trace) -> list[Term]:
    """Replay a trace: each event's redex must sit at its recorded
    address, and is rewritten to the contractum. Returns every whole
    term along the way, starting with the input. A mismatch means the
    trace does not belong to the term and raises EngineError."""
    term = _coerce_term(term)
    seq = [term]
    current = term
    for event in trace:
        spine = _subterm_spine(current, event.position)
        at, _ = spine[-1]
        if at != event.redex:
            raise EngineError(
                f"replay mismatch at step {event.step_index}: expected "
                f"{event.redex!r} at {''.join(event.position) or 'root'}, "
                f"found {at!r}"
            )
        rebuilt = event.contractum
        for parent, letter in reversed(spine[:-1]):
            if letter == "F":
                rebuilt = App(rebuilt, parent.operand)
            elif letter == "A":
                rebuilt = App(parent.operator, rebuilt)
            else:
                rebuilt = Lam(parent.param, rebuilt)
        current = rebuilt
        seq.append(current)
    return seq
