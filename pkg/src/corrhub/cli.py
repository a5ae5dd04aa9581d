"""Command-line interface: detect, gen-cov, curves, validate.

Every command takes ``--config FILE`` (flat ``key = value`` lines) and one
flag per configuration key; flags override the file.  Exit codes: 0 success
or alarm, 1 stream ended without alarm (or a failed validation), 2 usage
error, 3 data error.
"""

import csv
import json
import logging
import math
import sys
from dataclasses import asdict

import click
import numpy as np

from corrhub import _backend, scenarios, sim
from corrhub.config import KEYS, ConfigError, RunConfig, load_config, parse_value
from corrhub.detect import HubDetector
from corrhub.stats import Batcher, DegenerateColumnError, StreamFormatError, summarize

log = logging.getLogger("corrhub")

EXIT_OK, EXIT_NO_ALARM, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class DataError(Exception):
    pass


def _config_options(func):
    for key in reversed(KEYS):
        func = click.option(f"--{key.replace('_', '-')}", key, default=None, metavar="VALUE",
                            help=f"override config key '{key}'")(func)
    return click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                        help="flat key = value configuration file")(func)


def _resolve(config_path, overrides) -> RunConfig:
    try:
        base = load_config(config_path) if config_path else RunConfig()
        parsed = {k: parse_value(k, v) for k, v in overrides.items() if v is not None}
        return base.with_overrides(**parsed)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def _write_json(path, payload):
    text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if path in ("", "-"):
        click.echo(text, nl=False)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _is_number(field):
    try:
        float(field)
    except ValueError:
        return False
    return True


def read_rows(lines, p=None):
    """Yield float rows from CSV lines; a non-numeric first line is a header."""
    for lineno, row in enumerate(csv.reader(lines), 1):
        if not row or all(not f.strip() for f in row):
            continue
        if lineno == 1 and not all(_is_number(f) for f in row):
            continue
        try:
            vals = [float(f) for f in row]
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric field") from None
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"line {lineno}: non-finite value")
        if p is None:
            p = len(vals)
        elif len(vals) != p:
            raise DataError(f"line {lineno}: expected {p} fields, got {len(vals)}")
        yield vals


def run_detection(lines, cfg: RunConfig) -> dict:
    batcher = Batcher(cfg.n, cfg.p)
    det = None
    for row in read_rows(lines, cfg.p):
        try:
            dm = batcher.push(row)
        except StreamFormatError as exc:
            raise DataError(str(exc)) from exc
        if dm is None:
            continue
        if det is None:
            try:
                det = HubDetector(dm.p, cfg.n, cfg.detector_config())
            except ValueError as exc:
                raise click.UsageError(str(exc)) from exc
        try:
            det.update(summarize(dm))
        except DegenerateColumnError as exc:
            raise DataError(str(exc)) from exc
        if det.tau_hb is not None:
            break
    if det is None:
        return {"status": "no-alarm", "message": "stream ended without alarm", "batches": 0,
                "n": cfg.n, "p": batcher.p, "tau_v": None, "tau_u": None, "tau_hb": None,
                "tau_v_samples": None, "tau_u_samples": None, "tau_hb_samples": None,
                "selected": [], "g_at_stop": [], "g_global_at_stop": None,
                "config": asdict(cfg)}
    rep = det.report().to_dict()
    rep["status"] = "alarm" if rep.pop("alarm") else "no-alarm"
    rep["message"] = "alarm raised" if rep["status"] == "alarm" else "stream ended without alarm"
    rep["p"] = det.p
    rep["config"] = asdict(cfg)
    return rep


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Quickest detection of correlation changes and hub discovery."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("kernel backend: %s", _backend.NAME)


@main.command()
@_config_options
def detect(config_path, **overrides):
    """Run the detector on a CSV stream (one vector per line)."""
    cfg = _resolve(config_path, overrides)
    if not cfg.input:
        raise click.UsageError("detect needs an input file (use '-' for stdin)")
    try:
        fh = sys.stdin if cfg.input == "-" else open(cfg.input, newline="")
    except OSError as exc:
        raise click.UsageError(str(exc)) from exc
    try:
        report = run_detection(fh, cfg)
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    finally:
        if fh is not sys.stdin:
            fh.close()
    _write_json(cfg.output, report)
    sys.exit(EXIT_OK if report["status"] == "alarm" else EXIT_NO_ALARM)


def _cov_spec(cfg: RunConfig):
    if cfg.scenario:
        return scenarios.get(cfg.scenario).cov
    return sim.CovarianceSpec(cfg.p or 100, cfg.j, cfg.seed, cfg.diag_boost, cfg.dof)


def load_matrix(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(read_rows(fh))
    mat = np.array(rows, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DataError(f"{path}: covariance must be square")
    return mat


def write_matrix(path, mat):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in mat:
            writer.writerow([repr(float(x)) for x in row])


def covariance_metadata(sigma, cfg: RunConfig, spec=None) -> dict:
    gt = sim.ground_truth(sigma, cfg.n, cfg.calib_batches, seed=cfg.seed)
    order = np.lexsort((np.arange(gt.j.size), -gt.j))
    meta = {
        "p": int(sigma.shape[0]),
        "n": cfg.n,
        "scenario": cfg.scenario,
        "calib_batches": cfg.calib_batches,
        "ground_truth_seed": cfg.seed,
        "hubs": gt.hubs,
        "top_j": [int(k) + 1 for k in order[:2]],
        "theta": gt.theta,
        "j_estimates": gt.j.tolist(),
    }
    if spec is not None:
        meta.update(seed=spec.seed, j=spec.j, dof=spec.dof, diag_boost=spec.diag_boost)
    return meta


@main.command("gen-cov")
@_config_options
def gen_cov(config_path, **overrides):
    """Build a row-sparse covariance and its ground-truth metadata.

    With ``input`` set, the matrix is read from that CSV instead and only the
    ground truth is recomputed.
    """
    cfg = _resolve(config_path, overrides)
    out = cfg.output or "cov.csv"
    try:
        if cfg.input:
            sigma, spec = load_matrix(cfg.input), None
        else:
            spec = _cov_spec(cfg)
            sigma = sim.gen_rowsparse_cov(spec)
    except (DataError, sim.CovarianceConstructionError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except (KeyError, ValueError) as exc:
        raise click.UsageError(str(exc)) from exc
    if not cfg.input:
        write_matrix(out, sigma)
    meta = covariance_metadata(sigma, cfg, spec)
    _write_json(out + ".meta.json", meta)
    click.echo(f"wrote {out} and {out}.meta.json; hubs {meta['hubs']}")


ISOLATION_COLUMNS = ("threshold", "false_isolation_count", "rate", "paths")
DELAY_COLUMNS = ("threshold", "ln_mfa", "mean_delay", "censored_count")


def write_curves(prefix, metrics: sim.RunMetrics):
    iso_path, delay_path = f"{prefix}_isolation.csv", f"{prefix}_delay.csv"
    for path, cols, rows in ((iso_path, ISOLATION_COLUMNS, metrics.isolation_table()),
                             (delay_path, DELAY_COLUMNS, metrics.delay_table())):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            writer.writerows(rows)
    return iso_path, delay_path


@main.command()
@_config_options
def curves(config_path, **overrides):
    """Monte-Carlo false-isolation and delay-vs-ln(MFA) tables."""
    cfg = _resolve(config_path, overrides)
    try:
        spec = _cov_spec(cfg)
    except KeyError as exc:
        raise click.UsageError(str(exc)) from exc
    p = spec.p
    try:
        sc = sim.Scenario(n=cfg.n, p=p, cfg=cfg.detector_config(), cov=spec, paths=cfg.paths,
                          seed=cfg.seed, mean_shift=cfg.mean_shift, cap=cfg.cap,
                          name=cfg.scenario or "custom")
        metrics = sim.monte_carlo(sc, cfg.thresholds, isolation_paths=cfg.paths,
                                  delay_paths=cfg.delay_paths, mfa_paths=cfg.mfa_paths,
                                  workers=cfg.workers)
    except sim.CovarianceConstructionError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    iso_path, delay_path = write_curves(cfg.output or "curves", metrics)
    click.echo(f"hubs {metrics.hubs}; wrote {iso_path} and {delay_path}")


@main.command()
@_config_options
def validate(config_path, **overrides):
    """Check the null limit laws against simulation."""
    cfg = _resolve(config_path, overrides)
    checks = sim.validate_null(n=cfg.n, p=cfg.p or 100, batches=cfg.batches, seed=cfg.seed)
    ok = all(c.passed for c in checks)
    _write_json(cfg.output, {
        "n": cfg.n, "p": cfg.p or 100, "batches": cfg.batches, "seed": cfg.seed,
        "passed": ok,
        "checks": [dict(asdict(c), passed=bool(c.passed)) for c in checks],
    })
    sys.exit(EXIT_OK if ok else EXIT_NO_ALARM)


if __name__ == "__main__":
    main()
