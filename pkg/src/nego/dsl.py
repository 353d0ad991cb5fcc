"""Contract language: parsing, validation, and canonical rendering.

The language is keyword-led and whitespace-separated; indentation and line
breaks carry no meaning.  A contract describes one component: the services
it requires and provides, its threads (one activation clause plus a sequence
of task and call steps), latency requirements, and not-until ordering
requirements.  A separate repository file declares service interfaces
(method signatures, optional client bounds).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

KEYWORDS = frozenset(
    [
        "component",
        "services",
        "requires",
        "provides",
        "threads",
        "thread",
        "on",
        "RPC",
        "SIGNAL",
        "initialization",
        "time",
        "task",
        "onto",
        "timings",
        "timing",
        "control_flow",
        "not",
        "until",
        "service",
        "max_clients",
        "method",
    ]
)


class DslError(ValueError):
    """Base for contract-language errors, with source position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, column {col}: {message}"
        super().__init__(message)


class DslSyntaxError(DslError):
    pass


class DslValidationError(DslError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class MethodRef:
    """A qualified method reference `service.method(args)`.

    The argument list is opaque text, kept verbatim and compared verbatim.
    """

    service: str
    method: str
    args: str = ""
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)

    def __str__(self) -> str:
        return f"{self.service}.{self.method}({self.args})"


@dataclass(frozen=True)
class RpcEntry:
    ref: MethodRef

    def __str__(self) -> str:
        return f"RPC {self.ref}"


@dataclass(frozen=True)
class Initialization:
    def __str__(self) -> str:
        return "initialization"


@dataclass(frozen=True)
class TimeActivation:
    period: int
    jitter: int

    def __str__(self) -> str:
        return f"time (period={self.period} jitter={self.jitter})"


Activation = RpcEntry | Initialization | TimeActivation


@dataclass(frozen=True)
class TaskStep:
    name: str
    resource_type: str
    wcet: int
    bcet: int
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class CallStep:
    kind: str  # "RPC" or "SIGNAL"
    ref: MethodRef


Step = TaskStep | CallStep


@dataclass(frozen=True)
class Thread:
    name: str
    activation: Activation
    steps: tuple[Step, ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)

    def calls(self) -> Iterator[tuple[int, CallStep]]:
        for i, step in enumerate(self.steps):
            if isinstance(step, CallStep):
                yield i, step

    def tasks(self) -> Iterator[TaskStep]:
        for step in self.steps:
            if isinstance(step, TaskStep):
                yield step


@dataclass(frozen=True)
class TimingReq:
    bound: int
    # Either a thread name of the same contract or a method the contract calls.
    target: str | MethodRef
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)

    def target_str(self) -> str:
        return self.target if isinstance(self.target, str) else str(self.target)


@dataclass(frozen=True)
class NotUntilReq:
    forbidden: MethodRef
    prerequisite: MethodRef
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Contract:
    component: str
    requires: frozenset[str] = frozenset()
    provides: frozenset[str] = frozenset()
    threads: tuple[Thread, ...] = ()
    timings: tuple[TimingReq, ...] = ()
    control_flow: tuple[NotUntilReq, ...] = ()

    def thread(self, name: str) -> Thread:
        for t in self.threads:
            if t.name == name:
                return t
        raise KeyError(name)

    def thread_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.threads)

    def task_names(self) -> tuple[str, ...]:
        return tuple(s.name for t in self.threads for s in t.tasks())

    def entry_thread(self, service: str, method: str) -> Thread | None:
        for t in self.threads:
            a = t.activation
            if isinstance(a, RpcEntry) and a.ref.service == service and a.ref.method == method:
                return t
        return None

    def time_threads(self) -> tuple[Thread, ...]:
        return tuple(t for t in self.threads if isinstance(t.activation, TimeActivation))

    def init_threads(self) -> tuple[Thread, ...]:
        return tuple(t for t in self.threads if isinstance(t.activation, Initialization))


@dataclass(frozen=True)
class ServiceMethod:
    name: str
    args: str = ""

    def __str__(self) -> str:
        return f"{self.name}({self.args})"


@dataclass(frozen=True)
class ServiceInterface:
    name: str
    methods: tuple[ServiceMethod, ...]
    max_clients: int | None = None  # None = unbounded

    def method(self, name: str) -> ServiceMethod | None:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass(frozen=True)
class SoftwareModel:
    contracts: Mapping[str, Contract]
    interfaces: Mapping[str, ServiceInterface]

    def contract(self, name: str) -> Contract:
        try:
            return self.contracts[name]
        except KeyError:
            raise KeyError(f"unknown component {name!r}") from None

    def providers(self, service: str) -> tuple[str, ...]:
        return tuple(sorted(c for c, k in self.contracts.items() if service in k.provides))

    def component_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.contracts))


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class _Token:
    kind: str  # id, int, lparen, rparen, dot, eq, eof
    text: str
    line: int
    col: int


_PUNCT = {"(": "lparen", ")": "rparen", ".": "dot", "=": "eq"}
_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")


class _Lexer:
    def __init__(self, text: str):
        self._text = text
        self._pos = 0
        self._line = 1
        self._col = 1
        self._buffer: _Token | None = None

    def _skip_space(self) -> None:
        while self._pos < len(self._text) and self._text[self._pos] in " \t\r\n":
            self._bump()

    def _bump(self) -> str:
        ch = self._text[self._pos]
        self._pos += 1
        if ch == "\n":
            self._line += 1
            self._col = 1
        else:
            self._col += 1
        return ch

    def _scan(self) -> _Token:
        self._skip_space()
        if self._pos >= len(self._text):
            return _Token("eof", "", self._line, self._col)
        line, col = self._line, self._col
        ch = self._text[self._pos]
        if ch in _PUNCT:
            self._bump()
            return _Token(_PUNCT[ch], ch, line, col)
        m = _INT_RE.match(self._text, self._pos)
        if m:
            for _ in m.group():
                self._bump()
            return _Token("int", m.group(), line, col)
        m = _ID_RE.match(self._text, self._pos)
        if m:
            for _ in m.group():
                self._bump()
            return _Token("id", m.group(), line, col)
        raise DslSyntaxError(f"unexpected character {ch!r}", line, col)

    def peek(self) -> _Token:
        if self._buffer is None:
            self._buffer = self._scan()
        return self._buffer

    def take(self) -> _Token:
        tok = self.peek()
        self._buffer = None
        return tok

    def raw_args(self) -> str:
        """Read opaque text up to the matching ')'.

        Must be called directly after consuming a '(' token, with no pending
        lookahead.
        """
        if self._buffer is not None:
            raise AssertionError("raw_args called with buffered lookahead")
        start = self._pos
        depth = 0
        while self._pos < len(self._text):
            ch = self._text[self._pos]
            if ch == "(":
                depth += 1
            elif ch == ")":
                if depth == 0:
                    text = self._text[start : self._pos]
                    self._bump()
                    return text.strip()
                depth -= 1
            self._bump()
        raise DslSyntaxError("unterminated argument list", self._line, self._col)


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self._lex = _Lexer(text)

    # --- token helpers

    def _peek(self) -> _Token:
        return self._lex.peek()

    def _at_kw(self, *kws: str) -> bool:
        tok = self._peek()
        return tok.kind == "id" and tok.text in kws

    def _take_kw(self, kw: str) -> _Token:
        tok = self._lex.take()
        if tok.kind != "id" or tok.text != kw:
            raise DslSyntaxError(f"expected {kw!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return tok

    def _take_id(self, what: str) -> _Token:
        tok = self._lex.take()
        if tok.kind != "id":
            raise DslSyntaxError(f"expected {what}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        if tok.text in KEYWORDS:
            raise DslSyntaxError(f"expected {what}, found keyword {tok.text!r}", tok.line, tok.col)
        return tok

    def _take_int(self, what: str) -> tuple[int, _Token]:
        tok = self._lex.take()
        if tok.kind != "int":
            raise DslSyntaxError(f"expected {what}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return int(tok.text), tok

    def _take_punct(self, kind: str, sym: str) -> _Token:
        tok = self._lex.take()
        if tok.kind != kind:
            raise DslSyntaxError(f"expected {sym!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return tok

    def _expect_eof(self) -> None:
        tok = self._peek()
        if tok.kind != "eof":
            raise DslSyntaxError(f"unexpected token {tok.text!r}", tok.line, tok.col)

    # --- grammar

    def _method_ref(self, empty_args: bool = False) -> MethodRef:
        svc = self._take_id("service name")
        self._take_punct("dot", ".")
        meth = self._take_id("method name")
        self._take_punct("lparen", "(")
        args = self._lex.raw_args()
        if empty_args and args:
            raise DslSyntaxError("argument list must be empty here", svc.line, svc.col)
        return MethodRef(svc.text, meth.text, args, pos=(svc.line, svc.col))

    def _activation(self) -> Activation:
        tok = self._lex.take()
        if tok.kind == "id" and tok.text == "RPC":
            return RpcEntry(self._method_ref())
        if tok.kind == "id" and tok.text == "initialization":
            return Initialization()
        if tok.kind == "id" and tok.text == "time":
            self._take_punct("lparen", "(")
            self._take_kw("period")
            self._take_punct("eq", "=")
            period, ptok = self._take_int("period value")
            self._take_kw("jitter")
            self._take_punct("eq", "=")
            jitter, jtok = self._take_int("jitter value")
            self._take_punct("rparen", ")")
            if period <= 0:
                raise DslValidationError("period must be positive", ptok.line, ptok.col)
            if jitter >= period:
                raise DslValidationError("jitter must be smaller than the period", jtok.line, jtok.col)
            return TimeActivation(period, jitter)
        raise DslSyntaxError(
            f"expected RPC, initialization, or time, found {tok.text or 'end of input'!r}", tok.line, tok.col
        )

    def _key_int(self, key: str) -> tuple[int, _Token]:
        self._take_kw(key)
        self._take_punct("eq", "=")
        return self._take_int(f"{key} value")

    def _step(self) -> Step:
        tok = self._lex.take()
        if tok.text == "task":
            name = self._take_id("task name")
            self._take_kw("onto")
            rtype = self._take_id("resource type")
            wcet, wtok = self._key_int("wcet")
            bcet, btok = self._key_int("bcet")
            if wcet <= 0:
                raise DslValidationError("wcet must be positive", wtok.line, wtok.col)
            if bcet <= 0:
                raise DslValidationError("bcet must be positive", btok.line, btok.col)
            if bcet > wcet:
                raise DslValidationError(f"bcet {bcet} exceeds wcet {wcet}", btok.line, btok.col)
            return TaskStep(name.text, rtype.text, wcet, bcet, pos=(name.line, name.col))
        if tok.text in ("RPC", "SIGNAL"):
            return CallStep(tok.text, self._method_ref())
        raise AssertionError(tok)

    def _thread(self) -> Thread:
        self._take_kw("thread")
        name = self._take_id("thread name")
        self._take_kw("on")
        activation = self._activation()
        steps = []
        while self._at_kw("task", "RPC", "SIGNAL"):
            steps.append(self._step())
        return Thread(name.text, activation, tuple(steps), pos=(name.line, name.col))

    def _timing(self) -> TimingReq:
        self._take_kw("timing")
        bound, btok = self._take_int("latency bound")
        if bound <= 0:
            raise DslValidationError("latency bound must be positive", btok.line, btok.col)
        name = self._take_id("timing target")
        if self._peek().kind == "dot":
            self._take_punct("dot", ".")
            meth = self._take_id("method name")
            self._take_punct("lparen", "(")
            args = self._lex.raw_args()
            if args:
                raise DslSyntaxError("timing targets take no arguments", name.line, name.col)
            target: str | MethodRef = MethodRef(name.text, meth.text, "", pos=(name.line, name.col))
        else:
            target = name.text
        return TimingReq(bound, target, pos=(btok.line, btok.col))

    def _not_until(self) -> NotUntilReq:
        tok = self._take_kw("not")
        forbidden = self._method_ref(empty_args=True)
        self._take_kw("until")
        prerequisite = self._method_ref(empty_args=True)
        return NotUntilReq(forbidden, prerequisite, pos=(tok.line, tok.col))

    def parse_contract(self) -> Contract:
        self._take_kw("component")
        name = self._take_id("component name")
        requires: list[tuple[str, _Token]] = []
        provides: list[tuple[str, _Token]] = []
        if self._at_kw("services"):
            self._lex.take()
            while self._at_kw("requires", "provides"):
                which = self._lex.take().text
                svc = self._take_id("service name")
                (requires if which == "requires" else provides).append((svc.text, svc))
        threads: list[Thread] = []
        if self._at_kw("threads"):
            self._lex.take()
            while self._at_kw("thread"):
                threads.append(self._thread())
        timings: list[TimingReq] = []
        if self._at_kw("timings"):
            self._lex.take()
            while self._at_kw("timing"):
                timings.append(self._timing())
        control_flow: list[NotUntilReq] = []
        if self._at_kw("control_flow"):
            self._lex.take()
            while self._at_kw("not"):
                control_flow.append(self._not_until())
        self._expect_eof()
        contract = Contract(
            component=name.text,
            requires=frozenset(s for s, _ in requires),
            provides=frozenset(s for s, _ in provides),
            threads=tuple(threads),
            timings=tuple(timings),
            control_flow=tuple(control_flow),
        )
        _validate_contract(contract, requires, provides)
        return contract

    def parse_repository(self) -> dict[str, ServiceInterface]:
        interfaces: dict[str, ServiceInterface] = {}
        while self._at_kw("service"):
            self._lex.take()
            name = self._take_id("service name")
            if name.text in interfaces:
                raise DslValidationError(f"duplicate service {name.text!r}", name.line, name.col)
            max_clients: int | None = None
            if self._at_kw("max_clients"):
                self._lex.take()
                max_clients, mtok = self._take_int("client bound")
                if max_clients < 1:
                    raise DslValidationError("max_clients must be at least 1", mtok.line, mtok.col)
            methods: list[ServiceMethod] = []
            while self._at_kw("method"):
                self._lex.take()
                mname = self._take_id("method name")
                if any(m.name == mname.text for m in methods):
                    raise DslValidationError(f"duplicate method {mname.text!r}", mname.line, mname.col)
                self._take_punct("lparen", "(")
                args = self._lex.raw_args()
                methods.append(ServiceMethod(mname.text, args))
            interfaces[name.text] = ServiceInterface(name.text, tuple(methods), max_clients)
        self._expect_eof()
        return interfaces


def _validate_contract(
    contract: Contract,
    requires: list[tuple[str, _Token]],
    provides: list[tuple[str, _Token]],
) -> None:
    seen: set[tuple[str, str]] = set()
    for which, decls in (("requires", requires), ("provides", provides)):
        for svc, tok in decls:
            if (which, svc) in seen:
                raise DslValidationError(f"duplicate {which} declaration for {svc!r}", tok.line, tok.col)
            seen.add((which, svc))
    for svc, tok in provides:
        if svc in contract.requires:
            raise DslValidationError(f"service {svc!r} both required and provided", tok.line, tok.col)

    thread_names: set[str] = set()
    task_names: set[str] = set()
    entries: set[tuple[str, str]] = set()
    for thread in contract.threads:
        if thread.name in thread_names:
            raise DslValidationError(f"duplicate thread {thread.name!r}", *thread.pos)
        thread_names.add(thread.name)
        if isinstance(thread.activation, RpcEntry):
            ref = thread.activation.ref
            if ref.service not in contract.provides:
                raise DslValidationError(
                    f"entry method {ref} names a service the component does not provide", *ref.pos
                )
            if (ref.service, ref.method) in entries:
                raise DslValidationError(f"duplicate entry thread for {ref.service}.{ref.method}", *ref.pos)
            entries.add((ref.service, ref.method))
        for step in thread.steps:
            if isinstance(step, TaskStep):
                if step.name in task_names:
                    raise DslValidationError(f"duplicate task {step.name!r}", *step.pos)
                task_names.add(step.name)
            else:
                if step.ref.service not in contract.requires:
                    raise DslValidationError(
                        f"call {step.ref} names a service the component does not require", *step.ref.pos
                    )

    called = {(s.ref.service, s.ref.method) for t in contract.threads for _, s in t.calls()}
    for req in contract.timings:
        if isinstance(req.target, str):
            if req.target not in thread_names:
                raise DslValidationError(f"timing target {req.target!r} is not a thread of this component", *req.pos)
        else:
            tgt = (req.target.service, req.target.method)
            if req.target.service not in contract.requires | contract.provides:
                raise DslValidationError(
                    f"timing target {req.target} names a service this component neither requires nor provides",
                    *req.pos,
                )
            if tgt not in called and tgt not in entries:
                raise DslValidationError(
                    f"timing target {req.target} is never called by this component", *req.pos
                )
    for nua in contract.control_flow:
        for ref in (nua.forbidden, nua.prerequisite):
            if ref.service not in contract.requires | contract.provides:
                raise DslValidationError(
                    f"control-flow reference {ref} names a service this component neither requires nor provides",
                    *ref.pos,
                )


def parse_contract(text: str) -> Contract:
    """Parse and validate a single contract."""
    return _Parser(text).parse_contract()


def parse_service_repository(text: str) -> dict[str, ServiceInterface]:
    """Parse the service repository file into interface descriptions."""
    return _Parser(text).parse_repository()


# ---------------------------------------------------------------------------
# Rendering


def render_contract(contract: Contract) -> str:
    """Canonical textual form; re-parsing yields an equal contract."""
    out: list[str] = [f"component {contract.component}"]
    if contract.requires or contract.provides:
        out.append("  services")
        for svc in sorted(contract.requires):
            out.append(f"    requires {svc}")
        for svc in sorted(contract.provides):
            out.append(f"    provides {svc}")
    if contract.threads:
        out.append("  threads")
        for thread in contract.threads:
            out.append(f"    thread {thread.name}")
            out.append(f"      on {thread.activation}")
            for step in thread.steps:
                if isinstance(step, TaskStep):
                    out.append(
                        f"      task {step.name} onto {step.resource_type}"
                        f" wcet={step.wcet} bcet={step.bcet}"
                    )
                else:
                    out.append(f"      {step.kind} {step.ref}")
    if contract.timings:
        out.append("  timings")
        for req in contract.timings:
            out.append(f"    timing {req.bound} {req.target_str()}")
    if contract.control_flow:
        out.append("  control_flow")
        for nua in contract.control_flow:
            out.append(f"    not {nua.forbidden} until {nua.prerequisite}")
    return "\n".join(out) + "\n"


def render_service_repository(interfaces: Mapping[str, ServiceInterface]) -> str:
    out: list[str] = []
    for name in sorted(interfaces):
        iface = interfaces[name]
        out.append(f"service {iface.name}")
        if iface.max_clients is not None:
            out.append(f"  max_clients {iface.max_clients}")
        for meth in iface.methods:
            out.append(f"  method {meth.name} ({meth.args})")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Model assembly


def load_software_model(contract_texts: Iterable[str], repository_text: str) -> SoftwareModel:
    """Parse contracts plus the repository and cross-check every reference."""
    interfaces = parse_service_repository(repository_text)
    contracts: dict[str, Contract] = {}
    for text in contract_texts:
        contract = parse_contract(text)
        if contract.component in contracts:
            raise DslValidationError(f"duplicate component {contract.component!r}")
        contracts[contract.component] = contract
    model = SoftwareModel(contracts, interfaces)
    for contract in contracts.values():
        _check_against_repository(contract, interfaces)
    return model


def _check_against_repository(contract: Contract, interfaces: Mapping[str, ServiceInterface]) -> None:
    def _interface(service: str, pos: tuple[int, int]) -> ServiceInterface:
        iface = interfaces.get(service)
        if iface is None:
            raise DslValidationError(
                f"component {contract.component!r} references unknown service {service!r}", *pos
            )
        return iface

    def _check_signature(ref: MethodRef) -> None:
        iface = _interface(ref.service, ref.pos)
        meth = iface.method(ref.method)
        if meth is None:
            raise DslValidationError(
                f"service {ref.service!r} has no method {ref.method!r}", *ref.pos
            )
        if meth.args != ref.args:
            raise DslValidationError(
                f"signature mismatch for {ref}: repository declares ({meth.args})", *ref.pos
            )

    for svc in sorted(contract.requires | contract.provides):
        _interface(svc, (0, 0))
    for thread in contract.threads:
        if isinstance(thread.activation, RpcEntry):
            _check_signature(thread.activation.ref)
        for _, step in thread.calls():
            _check_signature(step.ref)
    for req in contract.timings:
        if isinstance(req.target, MethodRef):
            iface = _interface(req.target.service, req.target.pos)
            if iface.method(req.target.method) is None:
                raise DslValidationError(
                    f"service {req.target.service!r} has no method {req.target.method!r}", *req.target.pos
                )
    for nua in contract.control_flow:
        for ref in (nua.forbidden, nua.prerequisite):
            iface = _interface(ref.service, ref.pos)
            if iface.method(ref.method) is None:
                raise DslValidationError(f"service {ref.service!r} has no method {ref.method!r}", *ref.pos)
