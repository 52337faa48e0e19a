"""Rule-format laws: premises over argument behaviours, conclusions over term templates.

A law is data. The interpreter (``Law.gamma``), and the syntactic checkers
(``validate_format``, ``flatness_check``, ``simplicity_check``) all read the same
rule list, so the object that is checked is the object that runs.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .behaviour import Behaviour, Fun, Step, Stuck, UnitDone
from .syntax import (
    APP_OP,
    XTCL,
    Atom,
    Operator,
    Signature,
    Term,
    _Scanner,
    subst_atoms,
)
from .types import UNIT, Arrow, Ty, TypeReader, show_type


# -- premises and conclusions ---------------------------------------------------


@dataclass(frozen=True)
class Steps:
    arg: int
    result: str


@dataclass(frozen=True)
class LabelledTo:
    """``argI -[label]-> result``; ``label`` is ``argJ`` or a fresh name."""

    arg: int
    label: str
    result: str


@dataclass(frozen=True)
class IsValue:
    arg: int


Premise = Union[Steps, LabelledTo, IsValue]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Node:
    op: str
    params: tuple | None  # None: infer (only for app)
    args: tuple = ()


Template = Union[Var, Node]


@dataclass(frozen=True)
class StepsTo:
    template: Template


@dataclass(frozen=True)
class LabelledBy:
    label: str
    template: Template


@dataclass(frozen=True)
class Terminates:
    pass


Conclusion = Union[StepsTo, LabelledBy, Terminates]


@dataclass(frozen=True)
class Rule:
    op: str
    premises: tuple
    conclusion: Conclusion
    name: str = ""

    def __str__(self):
        return self.name or self.op


@dataclass
class LawSpec:
    name: str
    signature: Signature
    rules: list
    deterministic: bool = True
    powerset: bool = False

    def rules_for(self, op: str) -> list[Rule]:
        return [r for r in self.rules if r.op == op]


class MissingRank(KeyError):
    pass


def arg_name(i: int) -> str:
    return f"arg{i}"


_ARG = re.compile(r"^arg(\d+)$")


def arg_index(name: str) -> int | None:
    m = _ARG.match(name)
    return int(m.group(1)) if m else None


def template_vars(t: Template) -> Iterable[str]:
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from template_vars(a)


def template_ops(t: Template) -> Iterable[Node]:
    if isinstance(t, Node):
        yield t
        for a in t.args:
            yield from template_ops(a)


def show_template(t: Template) -> str:
    if isinstance(t, Var):
        return t.name
    if t.op == "app":
        return f"(app {' '.join(show_template(a) for a in t.args)})"
    out = t.op
    if t.params:
        out += "[" + ",".join(show_type(p) for p in t.params) + "]"
    if t.args:
        out += "(" + ",".join(show_template(a) for a in t.args) + ")"
    return out


# -- rule-file format ------------------------------------------------------------


class LawSyntaxError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def _read_template(sc: _Scanner, sig: Signature, atoms: dict) -> Template:
    if sc.peek() == "(":
        start = sc.i
        sc.i += 1
        head = sc.ident()
        if head != "app":
            raise ValueError(f"expected 'app' at position {start + 1}")
        parts = [_read_template(sc, sig, atoms)]
        while sc.peek() not in (")", ""):
            parts.append(_read_template(sc, sig, atoms))
        sc.expect(")")
        if len(parts) < 2:
            raise ValueError(f"app needs two arguments at position {start}")
        out = parts[0]
        for p in parts[1:]:
            out = Node("app", None, (out, p))
        return out
    name = sc.ident()
    if name in sig:
        params = sc.type_params(atoms)
        args = []
        if sc.i < len(sc.src) and sc.src[sc.i] == "(":
            sc.i += 1
            args.append(_read_template(sc, sig, atoms))
            while sc.peek() == ",":
                sc.i += 1
                args.append(_read_template(sc, sig, atoms))
            sc.expect(")")
        return Node(name, params, tuple(args))
    return Var(name)


_PREMISE_STEP = re.compile(r"^(arg\d+)\s*->\s*([A-Za-z_][\w']*)$")
_PREMISE_LAB = re.compile(r"^(arg\d+)\s*-\[\s*([A-Za-z_][\w']*)\s*\]->\s*([A-Za-z_][\w']*)$")
_PREMISE_VAL = re.compile(r"^(arg\d+)\s+val$")


def _parse_premise(text: str, line: int) -> Premise:
    text = text.strip()
    m = _PREMISE_LAB.match(text)
    if m:
        return LabelledTo(arg_index(m.group(1)), m.group(2), m.group(3))
    m = _PREMISE_STEP.match(text)
    if m:
        return Steps(arg_index(m.group(1)), m.group(2))
    m = _PREMISE_VAL.match(text)
    if m:
        return IsValue(arg_index(m.group(1)))
    raise LawSyntaxError(f"cannot read premise {text!r}", line)


def _split_top(text: str) -> list[str]:
    # commas inside brackets/parentheses belong to templates, not premise lists
    out, depth, cur = [], 0, []
    for c in text:
        if c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
        if c == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(c)
    out.append("".join(cur))
    return [p for p in (s.strip() for s in out) if p]


def _parse_op_decl(rest: str, line: int) -> Operator:
    # op NAME NPARAMS : ARGTYPE* => RESULT
    m = re.match(r"^([A-Za-z_][\w']*)\s+(\d+)\s*:(.*)=>(.*)$", rest)
    if not m:
        raise LawSyntaxError(f"cannot read operator declaration {rest!r}", line)
    name, n = m.group(1), int(m.group(2))
    atoms = {f"T{i + 1}": Atom(f"T{i + 1}") for i in range(n)}
    try:
        reader = TypeReader(m.group(3), atoms)
        args = []
        while reader.peek()[0]:
            args.append(reader.read())
        result = TypeReader(m.group(4), atoms).read()
    except ValueError as exc:
        raise LawSyntaxError(str(exc), line) from None
    return Operator(name, n, tuple(args), result)


def parse_law(text: str, name: str = "custom") -> LawSpec:
    """Read the line-oriented rule format.

    Lines: ``law NAME``, ``include BUILTIN``, ``op NAME N : ARGTYPES => RESULT``,
    ``flag deterministic|nondeterministic|powerset``, and
    ``rule OP: PREMISES => CONCLUSION``. ``#`` starts a comment.
    """
    sig = Signature(XTCL)
    rules: list[Rule] = []
    deterministic, powerset = True, False
    counters: dict[str, int] = {}
    pending: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        if kw == "law":
            name = rest
        elif kw == "include":
            base = builtin_law(rest)
            sig = sig.extended(base.signature)
            for r in base.rules:
                rules.append(r)
                counters[r.op] = counters.get(r.op, 0) + 1
            deterministic, powerset = base.deterministic, base.powerset
        elif kw == "op":
            sig = sig.extended([_parse_op_decl(rest, lineno)])
        elif kw == "flag":
            if rest == "deterministic":
                deterministic, powerset = True, False
            elif rest in ("nondeterministic", "powerset"):
                deterministic, powerset = False, True
            else:
                raise LawSyntaxError(f"unknown flag {rest!r}", lineno)
        elif kw == "rule":
            pending.append((lineno, rest))
        else:
            raise LawSyntaxError(f"unknown directive {kw!r}", lineno)
    for lineno, rest in pending:
        rules.append(_parse_rule(rest, sig, lineno, counters))
    return LawSpec(name, sig, rules, deterministic, powerset)


def _parse_rule(rest: str, sig: Signature, lineno: int, counters: dict) -> Rule:
    head, sep, body = rest.partition(":")
    if not sep or "=>" not in body:
        raise LawSyntaxError("rule needs 'OP: PREMISES => CONCLUSION'", lineno)
    op = head.strip()
    if op not in sig:
        raise LawSyntaxError(f"unknown operator {op!r}", lineno)
    prem_text, _, concl_text = body.rpartition("=>")
    premises = tuple(_parse_premise(p, lineno) for p in _split_top(prem_text))
    concl_text = concl_text.strip()
    n_params = sig[op].n_params
    atoms = {f"T{i + 1}": Atom(f"T{i + 1}") for i in range(n_params)}
    try:
        if concl_text == "done":
            concl: Conclusion = Terminates()
        elif concl_text.startswith("step "):
            sc = _Scanner(concl_text[5:])
            concl = StepsTo(_read_template(sc, sig, atoms))
            if sc.peek():
                raise ValueError(f"trailing input in template {concl_text!r}")
        elif concl_text.startswith("label "):
            sc = _Scanner(concl_text[6:])
            lab = sc.ident()
            concl = LabelledBy(lab, _read_template(sc, sig, atoms))
            if sc.peek():
                raise ValueError(f"trailing input in template {concl_text!r}")
        else:
            raise ValueError(f"cannot read conclusion {concl_text!r}")
    except ValueError as exc:
        raise LawSyntaxError(str(exc), lineno) from None
    k = counters.get(op, 0)
    counters[op] = k + 1
    return Rule(op, premises, concl, f"{op}#{k}")


def show_rule(r: Rule) -> str:
    prem = []
    for p in r.premises:
        if isinstance(p, Steps):
            prem.append(f"arg{p.arg} -> {p.result}")
        elif isinstance(p, LabelledTo):
            prem.append(f"arg{p.arg} -[{p.label}]-> {p.result}")
        else:
            prem.append(f"arg{p.arg} val")
    c = r.conclusion
    if isinstance(c, Terminates):
        cs = "done"
    elif isinstance(c, StepsTo):
        cs = "step " + show_template(c.template)
    else:
        cs = f"label {c.label} {show_template(c.template)}"
    return f"rule {r.op}: {', '.join(prem)} => {cs}"


_COMBINATOR_RULES = """\
rule e: => done
rule S: => label t S'[T1,T2,T3](t)
rule S': => label t S''[T1,T2,T3](arg0, t)
rule S'': => label t (app (app arg0 t) (app arg1 t))
rule K: => label t K'[T1,T2](t)
rule K': => label t arg0
rule I: => label t t
"""

BUILTIN_SOURCES = {
    "xtcl-cbn": "law xtcl-cbn\nflag deterministic\n"
    + _COMBINATOR_RULES
    + "rule app: arg0 -> X => step (app X arg1)\n"
    + "rule app: arg0 -[arg1]-> X => step X\n",
    "xtcl-cbv": "law xtcl-cbv\nflag deterministic\n"
    + _COMBINATOR_RULES
    + "rule app: arg0 -> X => step (app X arg1)\n"
    + "rule app: arg0 -[t]-> X, arg1 -> Y => step (app arg0 Y)\n"
    + "rule app: arg0 -[arg1]-> X, arg1 val => step X\n",
    "xtcl-nd": "law xtcl-nd\nflag nondeterministic\n"
    + _COMBINATOR_RULES
    + "rule app: arg0 -> X => step (app X arg1)\n"
    + "rule app: arg0 -[arg1]-> X => step X\n"
    + "rule app: arg1 -> Y => step (app arg0 Y)\n",
}

_builtin_cache: dict = {}


def builtin_law(name: str) -> LawSpec:
    if name not in BUILTIN_SOURCES:
        raise KeyError(f"unknown law {name!r}; built-ins are {sorted(BUILTIN_SOURCES)}")
    hit = _builtin_cache.get(name)
    if hit is None:
        hit = _builtin_cache[name] = parse_law(BUILTIN_SOURCES[name], name)
    return hit


def load_law(selector: str) -> LawSpec:
    """A built-in name or a path to a rule file."""
    if selector in BUILTIN_SOURCES:
        return builtin_law(selector)
    with open(selector, encoding="utf-8") as fh:
        return parse_law(fh.read(), selector)


# -- validation ------------------------------------------------------------------


@dataclass
class Report:
    accepted: bool
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "violations": self.violations}


class _TemplateTypeError(Exception):
    pass


def _type_template(t: Template, env: dict, law: LawSpec, atoms_of_head: tuple) -> Ty:
    if isinstance(t, Var):
        if t.name not in env:
            raise _TemplateTypeError(f"unbound metavariable {t.name!r}")
        ty = env[t.name]
        if ty is None:
            raise _TemplateTypeError(f"metavariable {t.name!r} depends on a label not in scope")
        return ty
    if t.op not in law.signature:
        raise _TemplateTypeError(f"unknown operator {t.op!r}")
    op = law.signature[t.op]
    arg_tys = [_type_template(a, env, law, atoms_of_head) for a in t.args]
    if t.params is None:
        if op is not APP_OP:
            raise _TemplateTypeError(f"operator {t.op} needs explicit type parameters")
        f = arg_tys[0]
        if not isinstance(f, Arrow):
            raise _TemplateTypeError(f"applying a non-function of type {show_type(f)}")
        params = (f.dom, f.cod)
    else:
        params = t.params
    if len(params) != op.n_params or len(arg_tys) != op.arity:
        raise _TemplateTypeError(f"wrong number of parameters or arguments for {t.op}")
    want, result = op.instance(params)
    for i, (w, a) in enumerate(zip(want, arg_tys)):
        if w is not a:
            raise _TemplateTypeError(
                f"argument {i} of {t.op} has type {show_type(a)}, expected {show_type(w)}"
            )
    return result


def _scope_and_type(law: LawSpec, rule: Rule) -> list[str]:
    """Problems with scoping and typing of one rule (empty when well formed)."""
    problems: list[str] = []
    if rule.op not in law.signature:
        return [f"unknown operator {rule.op!r}"]
    op = law.signature[rule.op]
    atoms = op.atoms
    arg_tys, head_ty = op.instance(atoms)
    env: dict[str, Ty | None] = {arg_name(i): ty for i, ty in enumerate(arg_tys)}
    fresh_labels: dict[str, Ty] = {}
    fun_results: dict[str, str] = {}
    for p in rule.premises:
        if not 0 <= p.arg < op.arity:
            problems.append(f"argument index {p.arg} out of range for {op.name}")
            continue
        a_ty = arg_tys[p.arg]
        if isinstance(p, Steps):
            if p.result in env or p.result in fresh_labels:
                problems.append(f"metavariable {p.result!r} bound twice")
            env[p.result] = a_ty
        elif isinstance(p, LabelledTo):
            if not isinstance(a_ty, Arrow):
                problems.append(f"labelled premise on argument {p.arg} of non-function type {show_type(a_ty)}")
                continue
            j = arg_index(p.label)
            if j is not None:
                if not 0 <= j < op.arity:
                    problems.append(f"label {p.label} out of range")
                elif arg_tys[j] is not a_ty.dom:
                    problems.append(f"label {p.label} has type {show_type(arg_tys[j])}, expected {show_type(a_ty.dom)}")
            else:
                if p.label in env or p.label in fresh_labels:
                    problems.append(f"metavariable {p.label!r} bound twice")
                fresh_labels[p.label] = a_ty.dom
                fun_results[p.result] = p.label
            if p.result in env or p.result in fresh_labels:
                problems.append(f"metavariable {p.result!r} bound twice")
            env[p.result] = a_ty.cod
    c = rule.conclusion
    if isinstance(c, Terminates):
        if head_ty is not UNIT:
            problems.append(f"'done' conclusion for operator of type {show_type(head_ty)}")
        return problems
    if isinstance(c, LabelledBy):
        if not isinstance(head_ty, Arrow):
            problems.append(f"'label' conclusion for operator of non-function type {show_type(head_ty)}")
            return problems
        scope = dict(env)
        if c.label in scope:
            problems.append(f"conclusion label {c.label!r} shadows a metavariable")
        scope[c.label] = head_ty.dom
        want = head_ty.cod
    else:
        scope = dict(env)
        want = head_ty
    for res, lab in fun_results.items():
        in_scope = isinstance(c, LabelledBy) and c.label == lab and fresh_labels[lab] is scope[c.label]
        if not in_scope:
            scope[res] = None
    for v in template_vars(c.template):
        if v not in scope:
            problems.append(f"unbound metavariable {v!r}")
    if problems:
        return problems
    try:
        got = _type_template(c.template, scope, law, atoms)
    except _TemplateTypeError as exc:
        return [str(exc)]
    if got is not want:
        problems.append(f"template has type {show_type(got)}, expected {show_type(want)}")
    return problems


def _abstract_outcomes(ty: Ty) -> tuple[str, ...]:
    if ty is UNIT:
        return ("step", "done")
    if isinstance(ty, Arrow):
        return ("step", "fun")
    return ("step", "done", "fun")


def _fires_abstract(rule: Rule, val: tuple) -> bool:
    for p in rule.premises:
        v = val[p.arg]
        if isinstance(p, Steps) and v != "step":
            return False
        if isinstance(p, LabelledTo) and v != "fun":
            return False
        if isinstance(p, IsValue) and v == "step":
            return False
    return True


def validate_format(law: LawSpec) -> Report:
    violations = []
    for r in law.rules:
        for msg in _scope_and_type(law, r):
            violations.append({"rule": str(r), "op": r.op, "reason": msg})
    if law.deterministic and not violations:
        for op in law.signature:
            rules = law.rules_for(op.name)
            if len(rules) < 2:
                continue
            arg_tys, _ = op.instance(op.atoms)
            for val in itertools.product(*[_abstract_outcomes(t) for t in arg_tys]):
                firing = [r for r in rules if _fires_abstract(r, val)]
                if len(firing) > 1:
                    violations.append(
                        {
                            "rule": ",".join(str(r) for r in firing),
                            "op": op.name,
                            "reason": "determinism: several rules fire when arguments behave as "
                            + ", ".join(val),
                        }
                    )
    return Report(not violations, violations)


# -- relative flatness and simplicity ---------------------------------------------


def flatness_check(law: LawSpec, rank: dict) -> Report:
    """Every conclusion template is built from lower-ranked operators, except possibly one same-rank head."""
    needed = {r.op for r in law.rules}
    for r in law.rules:
        if not isinstance(r.conclusion, Terminates):
            needed.update(n.op for n in template_ops(r.conclusion.template))
    missing = sorted(o for o in needed if o not in rank)
    if missing:
        raise MissingRank(f"no rank for operators {missing}")
    violations = []
    for r in law.rules:
        if isinstance(r.conclusion, Terminates):
            continue
        j = rank[r.op]
        t = r.conclusion.template
        children = t.args if isinstance(t, Node) and rank[t.op] == j else (t,)
        for c in children:
            for n in template_ops(c):
                if not rank[n.op] < j:
                    violations.append(
                        {
                            "rule": str(r),
                            "op": r.op,
                            "subterm": show_template(n),
                            "reason": f"operator {n.op} of rank {rank[n.op]} not below rank {j} of {r.op}",
                        }
                    )
                    break
    return Report(not violations, violations)


def simplicity_check(law: LawSpec) -> Report:
    """Rules that fire when every argument is a value must yield a value or step to a bare metavariable."""
    violations = []
    for r in law.rules:
        if any(isinstance(p, Steps) for p in r.premises):
            continue
        c = r.conclusion
        if isinstance(c, StepsTo) and not isinstance(c.template, Var):
            violations.append(
                {
                    "rule": str(r),
                    "op": r.op,
                    "reason": f"value-premise rule steps to {show_template(c.template)}, not a metavariable",
                }
            )
    return Report(not violations, violations)


# -- execution ---------------------------------------------------------------------


def _build(t: Template, env: dict, head_params: dict, law: LawSpec) -> Term:
    if isinstance(t, Var):
        v = env[t.name]
        if isinstance(v, tuple):
            f, lab = v
            return f(env[lab])
        return v
    op = law.signature[t.op]
    args = tuple(_build(a, env, head_params, law) for a in t.args)
    if t.params is None:
        f = args[0].ty
        params = (f.dom, f.cod)
    else:
        params = tuple(subst_atoms(p, head_params) for p in t.params)
    return Term(op, params, args)


def _conclude(rule: Rule, env: dict, head: Term, law: LawSpec, rule_no: int) -> Behaviour:
    c = rule.conclusion
    if isinstance(c, Terminates):
        return UnitDone
    hp = dict(zip(law.signature[rule.op].atoms, head.params))
    if isinstance(c, StepsTo):
        return Step(_build(c.template, env, hp, law))
    lab = c.label

    def apply(x, env=env, tmpl=c.template, hp=hp):
        e = dict(env)
        e[lab] = x
        return _build(tmpl, e, hp, law)

    key = (rule_no, head)
    return Fun(apply, key)


def _options(b) -> tuple:
    if b is None:
        return ()
    if isinstance(b, (set, frozenset)):
        return tuple(b)
    return (b,)


def instantiate(law: LawSpec, head: Term, args: list) -> Behaviour | frozenset:
    """Fire the rules for ``head``'s operator given ``(term, behaviour)`` pairs for its arguments.

    Deterministic laws return one behaviour (``Stuck`` if no rule applies); powerset
    laws return the frozenset of all outcomes.
    """
    out = []
    rules = law.rules
    for rule_no, r in enumerate(rules):
        if r.op != head.op.name:
            continue
        envs = [{arg_name(i): a[0] for i, a in enumerate(args)}]
        for p in r.premises:
            term_i, beh_i = args[p.arg]
            nxt = []
            for env in envs:
                for b in _options(beh_i):
                    if isinstance(p, Steps):
                        if isinstance(b, Step):
                            e = dict(env)
                            e[p.result] = b.target
                            nxt.append(e)
                    elif isinstance(p, LabelledTo):
                        if isinstance(b, Fun):
                            e = dict(env)
                            j = arg_index(p.label)
                            e[p.result] = b(args[j][0]) if j is not None else (b, p.label)
                            nxt.append(e)
                    elif b.is_value:
                        nxt.append(env)
            envs = nxt
            if not envs:
                break
        for env in envs:
            beh = _conclude(r, env, head, law, rule_no)
            if not law.powerset:
                return beh
            out.append(beh)
    if not law.powerset:
        return Stuck
    return frozenset(out)


class Law:
    """A validated law together with its memoised operational model."""

    def __init__(self, spec: LawSpec, check: bool = True):
        if check:
            rep = validate_format(spec)
            if not rep.accepted:
                raise ValueError(f"law {spec.name} is ill formed: {rep.violations}")
        self.spec = spec
        self.name = spec.name
        self.deterministic = spec.deterministic
        self.powerset = spec.powerset
        self._scrutinised: dict[str, set] = {}
        for r in spec.rules:
            s = self._scrutinised.setdefault(r.op, set())
            s.update(p.arg for p in r.premises)
        self._memo: dict[Term, object] = {}

    def gamma(self, t: Term):
        hit = self._memo.get(t)
        if hit is not None:
            return hit
        # iterative on the left spine to keep recursion shallow for long application chains
        sc = self._scrutinised.get(t.op.name, set())
        args = [(a, self.gamma(a) if i in sc else None) for i, a in enumerate(t.args)]
        out = instantiate(self.spec, t, args)
        self._memo[t] = out
        return out

    def instantiate(self, head: Term, args: list):
        return instantiate(self.spec, head, args)


_law_cache: dict = {}


def get_law(selector) -> Law:
    if isinstance(selector, Law):
        return selector
    if isinstance(selector, LawSpec):
        return Law(selector)
    hit = _law_cache.get(selector)
    if hit is None:
        hit = _law_cache[selector] = Law(load_law(selector))
    return hit


XTCL_RANK = {"app": 0, "e": 1, "S": 1, "S'": 1, "S''": 1, "K": 1, "K'": 1, "I": 1}
