import math
import time
import shutil
import logging
import importlib.resources as resources
from pathlib import Path
from typing import List

import click
import pandas as pd
from tabulate import tabulate
from termcolor import colored
from tqdm.auto import tqdm

from .charmod import is_prime
from .core import PyFekete
from .helpers import PyFeketeHelpers
from .plotting import render_tail_svg
from .theory import envelope
from .utils import VERSION
from .verify import CHECKS, LEVELS, format_report, load_fixtures, run_checks
from .writer import ExperimentManifest


@click.group()
@click.version_option(VERSION, prog_name='fekete')
def cli():
    """Numerical experiments on character sums and Fekete polynomials."""
    pass


def _client(config, threads, log_level=None) -> PyFekete:
    try:
        return PyFekete(config_path=config, use_env_variables=True, log_level=log_level, threads=threads)
    except ValueError as e:
        raise click.UsageError(str(e))


def _check_prime(p: int) -> int:
    if p < 3 or not is_prime(p):
        raise click.BadParameter(f"{p} is not an odd prime", param_hint='--p')
    return p


def _orders(text: str, p: int) -> List[int]:
    try:
        orders = PyFeketeHelpers.parse_orders(text)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint='--orders')
    bad = [d for d in orders if d < 2 or (p - 1) % d != 0]
    if bad:
        raise click.BadParameter(f"orders {bad} do not divide p-1 = {p - 1}", param_hint='--orders')
    return orders


def _check_index(m: int, orders: List[int]) -> None:
    bad = [d for d in orders if math.gcd(m, d) != 1]
    if bad:
        raise click.BadParameter(f"m={m} is not coprime to orders {bad}", param_hint='--m')


def _parse_floats(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f"cannot parse '{text}' as a comma-separated list of numbers", param_hint='--s')
    if not values:
        raise click.BadParameter("empty list", param_hint='--s')
    return values


def _store_manifests(fekete: PyFekete, command: str, params: dict, outputs: List[str], start: float) -> None:
    manifest = ExperimentManifest(command, params, wall_time=round(time.perf_counter() - start, 3), outputs=outputs)
    for path in outputs:
        fekete.writer.store_manifest(manifest, path)


@click.command()
def setup():
    """Copy the default configuration to the user's home directory."""
    home = Path.home()
    user_config_path = home / '.pyfekete_config.json'

    try:
        default_config_file = resources.files('pyfekete') / 'config.json'
        if not user_config_path.exists():
            with resources.as_file(default_config_file) as source:
                shutil.copy(source, user_config_path)
            click.echo(f"Default configuration copied to {user_config_path}.")
        else:
            click.echo(f"User configuration already exists at {user_config_path}.")
    except OSError as e:
        click.echo(f"Error during configuration setup: {e}")


@click.command()
@click.option('--p', 'p', type=int, default=None, help='Prime modulus (default: DEFAULT_P from the config)')
@click.option('--orders', default='2', show_default=True, help="Character orders, e.g. '2-7' or '2,3,6'")
@click.option('--m', 'm', type=int, default=1, show_default=True, help='Character index m, chi(g) = e(m/d)')
@click.option('--shift', type=int, default=0, show_default=True, help='Cyclic coefficient shift a')
@click.option('--kind', type=click.Choice(['midpoint', 'arcmax']), default='midpoint', show_default=True)
@click.option('--grid', type=int, default=None, help='Arc-max grid points per arc')
@click.option('--refine-tol', type=float, default=None, help='Arc refinement tolerance; 0 disables refinement')
@click.option('--refine-top', type=int, default=None, help='Number of largest arcs to refine; 0 refines every arc')
@click.option('--vstep', type=float, default=None, help='Spacing of the V grid')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='CSV output path')
@click.option('--svg', type=click.Path(dir_okay=False), default=None, help='Optional SVG plot path')
@click.option('--parquet', type=click.Path(dir_okay=False), default=None, help='Optional parquet dump of the raw spectra')
@click.option('--threads', type=int, default=None, help='Worker threads (overrides PYFEKETE_THREADS)')
@click.option('--config', type=click.Path(exists=True), default=None, help='Path to the configuration file')
@click.pass_context
def tail(ctx, p, orders, m, shift, kind, grid, refine_tol, refine_top, vstep, out, svg, parquet, threads, config):
    """Tail distributions Phi(V) of |f_chi|/sqrt(p), one per order."""
    start = time.perf_counter()
    fekete = _client(config, threads)
    p = _check_prime(fekete.config['DEFAULT_P'] if p is None else p)
    ds = _orders(orders, p)
    _check_index(m, ds)
    if parquet is not None and not parquet.endswith('.parquet'):
        raise click.BadParameter("path must end in .parquet", param_hint='--parquet')
    out = out or f"tail_p{p}_{kind}.csv"

    spectra, curves = [], []
    for d in tqdm(ds, desc="orders", disable=None):
        spec, curve = fekete.tail(p, d, m, kind, shift, vstep, grid=grid, refine_tol=refine_tol,
                                  refine_top=refine_top)
        spectra.append(spec)
        curves.append(curve)

    outputs = [fekete.writer.store_frame(pd.concat([c.to_frame() for c in curves], ignore_index=True), out)]
    if svg is not None:
        envelopes = []
        for d in ds:
            kinds = ('lower', 'upper') if d % 2 == 0 else ('odd_lower',)
            envelopes.extend(envelope(d, k) for k in kinds)
        windows = {d: PyFeketeHelpers.tail_window(p, d) for d in ds}
        title = f"Tail distribution mod p={p} ({kind})"
        outputs.append(fekete.writer.store_text(render_tail_svg(curves, envelopes, title=title, windows=windows),
                                                svg))
    if parquet is not None:
        frames = [s.to_frame().assign(order=s.d, shift=s.shift, kind=s.kind) for s in spectra]
        outputs.append(fekete.writer.store_frame(pd.concat(frames, ignore_index=True), parquet))

    params = dict(ctx.params, p=p, out=out, threads=fekete.threads)
    _store_manifests(fekete, 'tail', params, outputs, start)
    click.echo(f"Wrote {', '.join(outputs)}")


@click.command()
@click.option('--orders', default='2-10', show_default=True, help="Orders d, e.g. '2-10'")
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='JSON output path (prints a table otherwise)')
@click.option('--config', type=click.Path(exists=True), default=None, help='Path to the configuration file')
@click.pass_context
def constants(ctx, orders, out, config):
    """Theory constants delta_d, C_d and the envelope constants."""
    start = time.perf_counter()
    fekete = _client(config, None)
    try:
        ds = PyFeketeHelpers.parse_orders(orders)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint='--orders')
    if min(ds) < 2:
        raise click.BadParameter("orders must be at least 2", param_hint='--orders')

    records = [fekete.constants(d).to_record() for d in tqdm(ds, desc="constants", disable=None)]
    if out is None:
        columns = ["d", "delta_d", "hat_C_d", "C_d", "C_d_lower", "C_d_upper_proof", "exploratory"]
        click.echo(tabulate([[r[c] for c in columns] for r in records], headers=columns, floatfmt=".6g"))
        return
    fekete.writer.store_json(records, out)
    _store_manifests(fekete, 'constants', dict(ctx.params), [out], start)
    click.echo(f"Wrote {out}")


@click.command()
@click.option('--p', 'p', type=int, default=None, help='Prime modulus (default: DEFAULT_P from the config)')
@click.option('--orders', default='2', show_default=True, help='Character orders')
@click.option('--m', 'm', type=int, default=1, show_default=True, help='Character index m')
@click.option('--s', 's_values', default='0,1,2', show_default=True, help='Comma-separated Laplace parameters')
@click.option('--samples', type=int, default=None, help='Monte Carlo sample count N')
@click.option('--seed', type=int, default=None, help='Monte Carlo seed')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='JSON output path (prints a table otherwise)')
@click.option('--threads', type=int, default=None, help='Worker threads (overrides PYFEKETE_THREADS)')
@click.option('--config', type=click.Path(exists=True), default=None, help='Path to the configuration file')
@click.pass_context
def randmodel(ctx, p, orders, m, s_values, samples, seed, out, threads, config):
    """Empirical, theoretical and arithmetic Laplace transforms."""
    start = time.perf_counter()
    fekete = _client(config, threads)
    p = _check_prime(fekete.config['DEFAULT_P'] if p is None else p)
    ds = _orders(orders, p)
    _check_index(m, ds)
    s_list = _parse_floats(s_values)
    samples = fekete.config['SAMPLES'] if samples is None else samples
    seed = fekete.config['SEED'] if seed is None else seed
    if samples < 1:
        raise click.BadParameter("sample count must be positive", param_hint='--samples')

    records = []
    for d in ds:
        records.extend(fekete.laplace_records(p, d, s_list, m, samples, seed))
    overflowed = [r["s"] for r in records if r["overflow"]]
    if overflowed:
        click.echo(colored(f"Overflow at s = {overflowed}; see log_value", "yellow"))

    if out is None:
        columns = ["d", "s", "value", "std_error", "theoretical", "arithmetic"]
        click.echo(tabulate([[r[c] for c in columns] for r in records], headers=columns, floatfmt=".6g"))
        return
    fekete.writer.store_json(records, out)
    params = dict(ctx.params, p=p, samples=samples, seed=seed, threads=fekete.threads)
    _store_manifests(fekete, 'randmodel', params, [out], start)
    click.echo(f"Wrote {out}")


@click.command()
@click.option('--level', type=click.Choice(LEVELS), default='quick', show_default=True)
@click.option('--fixtures', 'fixtures_path', type=click.Path(), default=None, help='Alternative fixtures JSON')
@click.option('--only', multiple=True, help='Run only the named checks')
@click.pass_context
def verify(ctx, level, fixtures_path, only):
    """Run the invariant suite; exit 1 if any check fails."""
    try:
        fixtures = load_fixtures(fixtures_path)
    except (OSError, ValueError) as e:
        click.echo(colored(f"Configuration error: {e}", "red"), err=True)
        ctx.exit(2)
    unknown = set(only) - {c.name for c in CHECKS}
    if unknown:
        raise click.BadParameter(f"unknown checks {sorted(unknown)}", param_hint='--only')

    results = run_checks(level, fixtures, list(only) or None)
    click.echo(format_report(results))
    ctx.exit(0 if all(r.passed for r in results) else 1)


@click.command()
@click.argument('manifest', type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def replay(ctx, manifest):
    """Re-run the command recorded in MANIFEST with its recorded parameters."""
    try:
        recorded = ExperimentManifest.load(manifest)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint='MANIFEST')
    command = cli.commands.get(recorded.command)
    if command is None or recorded.command in ('replay', 'setup', 'verify'):
        raise click.BadParameter(f"cannot replay command '{recorded.command}'", param_hint='MANIFEST')
    if recorded.tool_version != VERSION:
        logging.warning(f"Manifest written by version {recorded.tool_version}, running {VERSION}")

    known = {param.name for param in command.params}
    ignored = set(recorded.parameters) - known
    if ignored:
        logging.warning(f"Ignoring unknown manifest parameters {sorted(ignored)}")
    ctx.invoke(command, **{k: v for k, v in recorded.parameters.items() if k in known})


cli.add_command(setup)
cli.add_command(tail)
cli.add_command(constants)
cli.add_command(randmodel)
cli.add_command(verify)
cli.add_command(replay)

if __name__ == "__main__":
    cli()
