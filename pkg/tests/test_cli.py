import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from tensorcat import cli
from tensorcat.errors import ParseError, ReboundIndex, SignatureMismatch, TypeMismatch, UnboundIndex, UnboundSymbol
from tensorcat import geometry as G

COMPOSITION = "(contract k (mul (tensor t _i ^k) (tensor u _k ^j)))"
DIVERGENCE = "(contract i (deriv _i (deriv (lower ^i) (const \"-log(rho)\"))))"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, text, name="e.sx"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_parse_examples():
    ast = cli.parse(COMPOSITION)
    assert isinstance(ast, cli.Contract) and ast.name == "k"
    assert isinstance(cli.parse(DIVERGENCE), cli.Contract)
    with pytest.raises(ReboundIndex):
        cli.Elaborator(G.polar(), {}).run(cli.parse("(mul (tensor metric _i _j) (tensor metric _i _k))"))


def test_raise_outside_index_position_is_rejected():
    with pytest.raises(ParseError):
        cli.parse("(mul (raise _a) (tensor cometric ^a ^b))")


def test_lowered_index_matches_metric_contraction(capsys, tmp_path):
    # t_i (lower ^j) = t_i_k g'^{kj}: metric with one lowered slot gives δ
    code, out, _ = run(capsys, "eval", "--expr", write(tmp_path, "(tensor metric _i (lower ^j))"),
                       "--order", "i,j")
    assert code == 0
    assert out.splitlines() == ["rho,rho*: 1", "rho,theta*: 0", "theta,rho*: 0", "theta,theta*: 1"]


def test_parse_errors_have_positions():
    with pytest.raises(ParseError) as exc:
        cli.parse("(mul (tensor t _i)\n  (tensor u ^j)")
    assert exc.value.line is not None and exc.value.column is not None
    with pytest.raises(ParseError) as exc:
        cli.parse("(frobnicate _i)")
    assert (exc.value.line, exc.value.column) == (1, 2)


def test_elaboration_errors():
    cs = G.polar()
    el = lambda src: cli.Elaborator(cs, {}).run(cli.parse(src))  # noqa: E731
    with pytest.raises(UnboundIndex):
        el("(contract k (tensor metric _k _j))")
    with pytest.raises(SignatureMismatch):
        el("(plus (tensor metric _i _j) (tensor metric _i _k))")
    with pytest.raises(TypeMismatch):
        el("(tensor metric ^i _j)")
    with pytest.raises(UnboundSymbol):
        el("(tensor nosuch _i)")


SAMPLES = [
    COMPOSITION, DIVERGENCE,
    "(plus (tensor metric _i _j) (scale 1/2 (tensor metric _j _i)))",
    "(delta _i ^i)",
    "(partial _k (tensor christoffel _i _j ^m))",
    "(tensor metric _i (lower ^j))",
    "(zero _i ^j)",
]


@pytest.mark.parametrize("src", SAMPLES)
def test_round_trip(src):
    ast = cli.parse(src)
    assert cli.parse(cli.render(ast)) == ast


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SAMPLES), st.sampled_from(SAMPLES))
def test_round_trip_composite(a, b):
    ast = cli.parse(f"(mul {a} {b})")
    assert cli.parse(cli.render(ast)) == ast


def test_christoffel_polar(capsys):
    code, out, _ = run(capsys, "christoffel", "--system", "polar")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert len(lines) == 3
    assert any(l.startswith("Gamma^rho_theta,theta = ") for l in lines)


def test_curvature_polar_is_flat(capsys):
    code, out, _ = run(capsys, "curvature", "--system", "polar")
    assert code == 0 and [l for l in out.splitlines() if not l.startswith("#")] == []


def test_verify_gr(capsys):
    code, out, _ = run(capsys, "verify-gr", "--system", "schwarzschild", "--rs", "1", "--c", "1",
                       "--samples", "30", "--seed", "2")
    assert code == 0 and "16/16 entries vanish" in out
    code, out, _ = run(capsys, "verify-gr", "--system", "polar", "--samples", "10")
    assert code == 0


def test_polar_demo(capsys):
    code, out, _ = run(capsys, "polar-demo")
    assert code == 0
    assert out.splitlines()[-1] == "divergence = 0"


def test_transform_demo(capsys):
    code, out, _ = run(capsys, "transform-demo")
    assert code == 0 and "v (cartesian)" in out


def test_eval_trace_and_divergence(capsys, tmp_path):
    code, out, _ = run(capsys, "eval", "--expr", write(tmp_path, "(contract i (delta _i ^i))"),
                       "--system", "schwarzschild")
    assert (code, out.strip()) == (0, "4")
    code, out, _ = run(capsys, "eval", "--expr", write(tmp_path, DIVERGENCE), "--system", "polar")
    assert (code, out.strip()) == (0, "0")


def test_eval_numeric_with_prims(capsys, tmp_path):
    src = write(tmp_path, COMPOSITION)
    code, out, _ = run(capsys, "eval", "--expr", src, "--order", "i,j",
                       "--prim", "t=1,2,3,4", "--prim", "u=0,1,1,0", "--at", "rho=2,theta=0.3")
    assert code == 0
    # [[1,2],[3,4]]·[[0,1],[1,0]] = [[2,1],[4,3]]
    assert out.splitlines() == ["rho,rho*: 2", "rho,theta*: 1", "theta,rho*: 4", "theta,theta*: 3"]


def test_eval_errors(capsys, tmp_path):
    code, _, err = run(capsys, "eval", "--expr", write(tmp_path, "(mul (tensor metric _i _j)"))
    assert code == 2 and err.startswith("E_PARSE")
    code, _, err = run(capsys, "eval", "--expr", write(tmp_path, "(mul (tensor metric _i _j) (tensor metric _i _k))"))
    assert code == 2 and err.startswith("E_REBOUND_INDEX: 1:")
    code, _, err = run(capsys, "eval", "--expr", str(tmp_path / "missing.sx"))
    assert code == 2 and err.startswith("E_IO")
    code, _, err = run(capsys, "eval", "--expr", write(tmp_path, '(const "log(rho)")'), "--at", "rho=0")
    assert code == 4 and err.startswith("E_EVAL_SINGULAR")


def test_diagram(capsys, tmp_path):
    out_svg = tmp_path / "d.svg"
    code, out, _ = run(capsys, "diagram", "--expr", write(tmp_path, COMPOSITION), "--prim", "t=1,2,3,4",
                       "--prim", "u=0,1,1,0", "-o", str(out_svg))
    assert code == 0 and out.startswith("wrote")
    first = out_svg.read_bytes()
    run(capsys, "diagram", "--expr", write(tmp_path, COMPOSITION), "--prim", "t=1,2,3,4",
        "--prim", "u=0,1,1,0", "-o", str(out_svg))
    assert out_svg.read_bytes() == first and first.startswith(b"<?xml")


def test_laws_command_is_reproducible(capsys):
    code, first, _ = run(capsys, "laws", "--dims", "2", "--morphisms", "30", "--seed", "4")
    assert code == 0 and "laws hold" in first
    _, second, _ = run(capsys, "laws", "--dims", "2", "--morphisms", "30", "--seed", "4")
    assert first == second


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("TENSORCAT_SEED", "17")
    args = cli.build_parser().parse_args(["laws"])
    assert args.seed == 17


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "tensorcat.cli", "polar-demo"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.splitlines()[-1] == "divergence = 0"
