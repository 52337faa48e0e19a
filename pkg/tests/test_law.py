import pytest

from hogpred.behaviour import Fun, Step
from hogpred.law import (
    BUILTIN_SOURCES, XTCL_RANK, IsValue, LabelledTo, LawSyntaxError, MissingRank, Steps, flatness_check,
    get_law, load_law, parse_law, show_rule, simplicity_check, validate_format,
)

LOOP = "law loop\nflag deterministic\nop f 0 : unit => unit\nrule f: => step f(arg0)\n"
DUPLICATE_APP = BUILTIN_SOURCES["xtcl-cbn"] + "rule app: arg0 -[arg1]-> X => step X\n"
ARGUMENT_FIRST = BUILTIN_SOURCES["xtcl-cbn"] + "rule app: arg1 -> Y => step (app arg0 Y)\n"


def _fires(rule, behaviours):
    # concrete premise check against actual argument behaviours
    for p in rule.premises:
        b = behaviours[p.arg]
        if isinstance(p, Steps) and not isinstance(b, Step):
            return False
        if isinstance(p, LabelledTo) and not isinstance(b, Fun):
            return False
        if isinstance(p, IsValue) and isinstance(b, Step):
            return False
    return True


def concrete_overlaps(spec, universe, behaviour_of):
    """Rule pairs that fire together on some member, judged from real behaviours."""
    found = set()
    for t in universe.terms:
        rules = spec.rules_for(t.op.name)
        behaviours = [behaviour_of(a) for a in t.args]
        fired = [r.name for r in rules if _fires(r, behaviours)]
        if len(fired) > 1:
            found.add(",".join(fired))
    return found


@pytest.mark.parametrize("name", sorted(BUILTIN_SOURCES))
def test_builtins_are_well_formed(name):
    assert validate_format(load_law(name)).accepted


@pytest.mark.parametrize("name", ["xtcl-cbn", "xtcl-cbv"])
def test_builtin_determinism_agrees_with_concrete_oracle(name, small_universe, cbn):
    spec = load_law(name)
    assert concrete_overlaps(spec, small_universe, cbn.gamma) == set()


@pytest.mark.parametrize("src,pairs", [(DUPLICATE_APP, {"app#1,app#2"}), (ARGUMENT_FIRST, {"app#0,app#2", "app#1,app#2"})])
def test_determinism_violation_matches_concrete_oracle(src, pairs, small_universe, cbn):
    spec = parse_law(src, "fixture")
    rep = validate_format(spec)
    assert not rep.accepted
    symbolic = {v["rule"] for v in rep.violations if v["reason"].startswith("determinism")}
    assert symbolic == pairs
    assert concrete_overlaps(spec, small_universe, cbn.gamma) == pairs


def test_nondeterministic_flag_allows_overlap():
    assert validate_format(load_law("xtcl-nd")).accepted


def test_ill_formed_law_cannot_be_loaded():
    with pytest.raises(ValueError):
        get_law(parse_law(DUPLICATE_APP, "dup"))


def test_unbound_metavariable():
    rep = validate_format(parse_law("law b\ninclude xtcl-cbn\nrule app: arg0 -> X => step Y\n"))
    assert not rep.accepted
    assert "unbound metavariable 'Y'" in rep.violations[0]["reason"]


@pytest.mark.parametrize("text,line", [
    ("law b\nrule q: => done\n", 2),
    ("law b\nflag weird\n", 2),
    ("law b\n\n# c\nrule app arg0 -> X\n", 4),
])
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(LawSyntaxError) as exc:
        parse_law(text)
    assert f"line {line}" in str(exc.value)


def test_show_rule_roundtrip():
    spec = load_law("xtcl-cbv")
    text = "law again\nflag deterministic\n" + "\n".join(show_rule(r) for r in spec.rules) + "\n"
    again = parse_law(text, "again")
    assert [show_rule(r) for r in again.rules] == [show_rule(r) for r in spec.rules]


def test_rule_file_loading(tmp_path):
    p = tmp_path / "loop.rules"
    p.write_text(LOOP)
    spec = load_law(str(p))
    assert "f" in spec.signature
    assert validate_format(spec).accepted


def test_flatness_standard_rank():
    assert flatness_check(load_law("xtcl-cbn"), XTCL_RANK).accepted


def test_flatness_inverted_rank_names_rule():
    inverted = {k: 1 - v for k, v in XTCL_RANK.items()}
    rep = flatness_check(load_law("xtcl-cbn"), inverted)
    assert not rep.accepted
    assert [v["rule"] for v in rep.violations] == ["S''#0"]
    assert rep.violations[0]["subterm"] == "(app (app arg0 t) (app arg1 t))"


def test_flatness_missing_rank():
    rank = dict(XTCL_RANK)
    del rank["K'"]
    with pytest.raises(MissingRank):
        flatness_check(load_law("xtcl-cbn"), rank)


@pytest.mark.parametrize("name", sorted(BUILTIN_SOURCES))
def test_builtins_are_simple(name):
    assert simplicity_check(load_law(name)).accepted


def test_loop_fixture_is_not_simple():
    rep = simplicity_check(parse_law(LOOP, "loop"))
    assert not rep.accepted
    assert rep.violations[0]["rule"] == "f#0"


def test_gamma_is_memoised(cbn):
    from hogpred.syntax import E, I, app
    from hogpred.types import UNIT

    t = app(I(UNIT), E())
    assert cbn.gamma(t) is cbn.gamma(t)
    assert cbn.gamma(t).target is E()
