"""Command-line interface."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import yaml

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .cosets import GAMMA, LEFT, RIGHT, CosetEngine, CosetVector, LevelError
from .groups import GroupError, ModularPair
from .hecke import (HeckeAlgebra, HeckeError, format_hecke, hecke_from_terms, instance_from_dict,
                    parse_terms)
from .report import VerificationReport, emit

SIDES = {"right": RIGHT, "left": LEFT}


class Context:
    def __init__(self, config: RunConfig):
        self.config = config
        self.pair = config.build_pair()
        self.engine = CosetEngine(self.pair)
        self.algebra = HeckeAlgebra(self.engine)


def _context(config: str) -> Context:
    try:
        return Context(load_config(config))
    except (ConfigError, GroupError) as exc:
        raise click.UsageError(str(exc)) from exc


config_option = click.option("--config", "-c", "config", required=True,
                              help="Config file, or a shipped name: s3_c2, s4_s3, modular_p2/3/5.")
format_option = click.option("--format", "fmt", type=click.Choice(["json", "text"]), default=None,
                             help="Report format (defaults to the config's).")


def _emit_report(report: VerificationReport, fmt: str, output: str | None = None) -> None:
    text = emit(report, fmt)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    sys.exit(0 if report.ok else 1)


def _parse(ctx: Context, text: str):
    try:
        return ctx.pair.parse(text)
    except GroupError as exc:
        raise click.BadParameter(str(exc)) from exc


@click.group()
@click.version_option(__version__, prog_name="heckecalc")
def main():
    """Hecke algebras of almost normal pairs: exact computation and verification."""


# -- pair -------------------------------------------------------------------


@main.group()
def pair():
    """Group pairs."""


@pair.command("info")
@config_option
def pair_info(config):
    ctx = _context(config)
    info = ctx.pair.describe()
    if ctx.pair.is_finite:
        info["order"] = ctx.pair.order
        info["gamma_order"] = len(ctx.pair.gamma)
        info["index"] = len({ctx.pair.canon_right(g) for g in ctx.pair.elements()})
        info["double_cosets"] = [
            {"rep": ctx.pair.format(s), "size": len(ctx.pair.double_coset(s)),
             "index": ctx.engine.stabilizer_index(s)}
            for s in ctx.algebra.double_cosets()]
    else:
        sp = ctx.pair.sigma_p(1)
        info["sigma_p"] = ctx.pair.format(sp)
        info["t_p_index"] = ctx.engine.stabilizer_index(sp)
    click.echo(json.dumps(info, indent=2, sort_keys=True))


# -- coset --------------------------------------------------------------------


@main.group()
def coset():
    """Coset canonical forms and decompositions."""


@coset.command("canon")
@config_option
@click.option("--side", type=click.Choice(list(SIDES)), default="right")
@click.option("--level", default="G", help="Level tag: G or G[s1;s2;...].")
@click.argument("element")
def coset_canon(config, side, level, element):
    """Canonical key of the coset containing ELEMENT."""
    ctx = _context(config)
    try:
        key = ctx.engine.canon(SIDES[side], ctx.engine.parse_level(level), _parse(ctx, element))
    except LevelError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(ctx.engine.format_key(key))


@coset.command("decompose")
@config_option
@click.option("--side", type=click.Choice(list(SIDES)), default="right")
@click.argument("sigma")
def coset_decompose(config, side, sigma):
    """One-sided cosets making up the double coset of SIGMA."""
    ctx = _context(config)
    s = _parse(ctx, sigma)
    keys = (ctx.engine.decompose_double_right(s) if side == "right"
            else ctx.engine.decompose_double_left(s))
    for key in keys:
        click.echo(ctx.engine.format_key(key))


@coset.command("split")
@config_option
@click.option("--level", required=True, help="Finer level tag, e.g. G[(1 4)].")
@click.argument("key")
def coset_split(config, level, key):
    """Split the coset KEY (e.g. 'R|G|()') into cosets of a finer level."""
    ctx = _context(config)
    try:
        pieces = ctx.engine.split_coset(ctx.engine.parse_key(key), ctx.engine.parse_level(level))
    except (LevelError, ValueError, KeyError) as exc:
        raise click.UsageError(str(exc)) from exc
    for piece in pieces:
        click.echo(ctx.engine.format_key(piece))


# -- hecke --------------------------------------------------------------------


@main.group()
def hecke():
    """Products, actions and relation checks in the Hecke algebra.

    Elements are given as repeated terms 'c@sigma' (c defaults to 1), each
    standing for c times the double coset of sigma.
    """


def _hecke(ctx: Context, terms):
    try:
        return hecke_from_terms(ctx.algebra, parse_terms(ctx.pair, terms))
    except (GroupError, ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(str(exc)) from exc


@hecke.command("mul")
@config_option
@click.option("-a", "a_terms", multiple=True, required=True)
@click.option("-b", "b_terms", multiple=True, required=True)
def hecke_mul(config, a_terms, b_terms):
    ctx = _context(config)
    click.echo(format_hecke(ctx.pair, ctx.algebra.mul(_hecke(ctx, a_terms), _hecke(ctx, b_terms))))


@hecke.command("star")
@config_option
@click.option("-h", "h_terms", multiple=True, required=True)
def hecke_star(config, h_terms):
    ctx = _context(config)
    click.echo(format_hecke(ctx.pair, ctx.algebra.star(_hecke(ctx, h_terms))))


@hecke.command("act")
@config_option
@click.option("-h", "h_terms", multiple=True, required=True)
@click.option("--side", type=click.Choice(list(SIDES)), default="right",
              help="right: h acts on [Gamma y]; left: h acts on [y Gamma] from the right.")
@click.argument("cosets", nargs=-1, required=True)
def hecke_act(config, h_terms, side, cosets):
    """Apply h to the sum of the cosets of the given elements (terms 'c@y')."""
    ctx = _context(config)
    h = _hecke(ctx, h_terms)
    keys = {}
    try:
        terms = parse_terms(ctx.pair, cosets)
    except (GroupError, ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(str(exc)) from exc
    for c, y in terms:
        k = ctx.engine.canon(SIDES[side], GAMMA, y)
        keys[k] = keys.get(k, 0) + c
    v = CosetVector(GAMMA, SIDES[side], keys)
    out = ctx.algebra.act_left(h, v) if side == "right" else ctx.algebra.act_right(h, v)
    for key, c in out:
        click.echo(f"{c}\t{ctx.engine.format_key(key)}")


@hecke.command("verify-relation")
@config_option
@click.option("--instance", "instance_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["elements", "cosets"]), default=None)
def hecke_verify_relation(config, instance_file, method):
    """Check that both sides of an instance are disjoint unions of the same set.

    The instance file has keys 'lhs' and 'rhs' (lists of [a, b] pairs for the
    sets a*Gamma_T*b) and an optional 'level' (list of elements defining T).
    """
    ctx = _context(config)
    with open(instance_file, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    try:
        inst = instance_from_dict(ctx.pair, ctx.engine, data)
    except (GroupError, ValueError, TypeError) as exc:
        raise click.UsageError(f"bad instance file: {exc}") from exc
    verdict = ctx.algebra.verify_relation(inst, method)
    if verdict:
        click.echo("valid")
        return
    witness = "" if verdict.witness is None else f" (witness {ctx.pair.format(verdict.witness)})"
    click.echo(f"invalid: {verdict.reason}{witness}")
    sys.exit(1)


# -- rep / phi ------------------------------------------------------------------


def _rep_engine(ctx: Context, pi_file: str | None):
    from .rep import RepEngine, RepError, build_t, load_extension

    if not ctx.pair.is_finite:
        raise click.UsageError("representation checks need a finite pair")
    path = Path(pi_file) if pi_file else ctx.config.pi_path()
    if path is None:
        raise click.UsageError("no pi file: pass --pi or set 'pi' in the config")
    try:
        pi = load_extension(ctx.pair, path)
        return RepEngine(ctx.engine, build_t(pi, ctx.config.tolerance), ctx.config.tolerance, pi=pi)
    except RepError as exc:
        raise click.UsageError(str(exc)) from exc


@main.group()
def rep():
    """The t-coefficient representation (finite pairs)."""


@rep.command("check")
@config_option
@click.option("--pi", "pi_file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--relation", default="all", help="0..6, a comma list, or 'all'.")
@format_option
def rep_check(config, pi_file, relation, fmt):
    ctx = _context(config)
    which = range(7) if relation == "all" else [int(x) for x in relation.split(",")]
    if any(k not in range(7) for k in which):
        raise click.BadParameter("relations are numbered 0..6")
    engine = _rep_engine(ctx, pi_file)
    report = VerificationReport(config=ctx.config.echo(), tool_version=__version__)
    report.extend(engine.check_all(which))
    _emit_report(report, fmt or ctx.config.format)


@main.group()
def phi():
    """The diagonal representation and the trace Gram pairing."""


@phi.command("check")
@config_option
@click.option("--pi", "pi_file", type=click.Path(exists=True, dir_okay=False), default=None)
@format_option
def phi_check(config, pi_file, fmt):
    from .phi import DiagonalPhi

    ctx = _context(config)
    report = VerificationReport(config=ctx.config.echo(), tool_version=__version__)
    report.extend(DiagonalPhi(_rep_engine(ctx, pi_file)).check_all())
    _emit_report(report, fmt or ctx.config.format)


@phi.command("gram")
@config_option
@click.option("--pi", "pi_file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--pairs", "pairs_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="YAML list of [sigma, sigma'] pairs; defaults to all transversal pairs.")
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False), default=None)
def phi_gram(config, pi_file, pairs_file, csv_out):
    from .phi import gram, parse_pairs

    ctx = _context(config)
    engine = _rep_engine(ctx, pi_file)
    pairs = None
    if pairs_file:
        with open(pairs_file, encoding="utf-8") as fh:
            pairs = parse_pairs(ctx.pair, yaml.safe_load(fh))
    g = gram(engine, pairs)
    if csv_out:
        with open(csv_out, "w", encoding="utf-8", newline="") as fh:
            g.write_csv(fh)
    checks = g.checks(ctx.config.tolerance)
    click.echo(f"{len(g.labels)} pairs, hermitian residual {g.hermitian_residual:.3e}, "
               f"min eigenvalue {g.min_eigenvalue:.6e}")
    if not csv_out:
        g.write_csv(sys.stdout)
    sys.exit(1 if any(c.failed for c in checks) else 0)


# -- tree -----------------------------------------------------------------------


def _ball(p: int, r: int):
    from .modular import TreeError, build_tree_ball

    try:
        return build_tree_ball(CosetEngine(ModularPair(p)), r)
    except (TreeError, GroupError) as exc:
        raise click.UsageError(str(exc)) from exc


@main.group()
def tree():
    """The coset tree of the modular pair."""


p_option = click.option("-p", "p", type=int, required=True, help="A prime.")
r_option = click.option("-r", "radius", type=int, required=True, help="Ball radius.")


@tree.command("ball")
@p_option
@r_option
@click.option("--dot", "dot_out", type=click.Path(dir_okay=False), default=None)
@format_option
def tree_ball(p, radius, dot_out, fmt):
    from .modular import PsiUndefined, build_psi, to_dot, tree_invariants

    ball = _ball(p, radius)
    try:
        build_psi(ball)
    except PsiUndefined:
        pass
    if dot_out:
        Path(dot_out).write_text(to_dot(ball), encoding="utf-8")
    report = VerificationReport(config={"p": p, "radius": radius}, tool_version=__version__)
    report.extend(tree_invariants(ball))
    _emit_report(report, fmt or "text")


@tree.command("psi")
@p_option
@r_option
def tree_psi(p, radius):
    """Print each vertex with its reduced-word label."""
    from .modular import PsiUndefined, build_psi, format_word, psi_checks

    ball = _ball(p, radius)
    try:
        psi = build_psi(ball)
    except PsiUndefined as exc:
        raise click.UsageError(str(exc)) from exc
    for v in ball.vertices:
        click.echo(f"{ball.depth[v]}\tR|G|{ModularPair(p).format(v)}\t{format_word(psi[v])}")
    sys.exit(1 if any(c.failed for c in psi_checks(ball, psi)) else 0)


@tree.command("spectrum")
@p_option
@r_option
@click.option("--csv", "csv_out", is_flag=False, flag_value="-", default=None,
              help="Write radius,spectral_radius rows for r = 0..R (to a file, or stdout with '-').")
def tree_spectrum(p, radius, csv_out):
    from .modular import spectral_radius, truncated_spectrum

    if csv_out:
        fh = sys.stdout if csv_out == "-" else open(csv_out, "w", encoding="utf-8", newline="")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["radius", "vertices", "spectral_radius"])
        for r in range(radius + 1):
            ball = _ball(p, r)
            w.writerow([r, len(ball), repr(spectral_radius(ball))])
        if fh is not sys.stdout:
            fh.close()
        return
    for x in truncated_spectrum(_ball(p, radius)):
        click.echo(repr(float(x)))


# -- run-all --------------------------------------------------------------------


@main.command("run-all")
@click.argument("config")
@click.option("--select", multiple=True, help="Check-id prefixes to run (repeatable); overrides the config.")
@format_option
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
def run_all_cmd(config, select, fmt, output):
    """Run every applicable check for CONFIG and emit a report."""
    from .runner import run_all

    try:
        cfg = load_config(config)
    except (ConfigError, GroupError) as exc:
        raise click.UsageError(str(exc)) from exc
    if select:
        cfg.select = [s for s in select if s != "none"]
    try:
        report = run_all(cfg)
    except (GroupError, HeckeError, LevelError) as exc:
        raise click.ClickException(str(exc)) from exc
    _emit_report(report, fmt or cfg.format, output)


if __name__ == "__main__":
    main()
