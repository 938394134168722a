"""Command-line client for the solver service.

The CLI is a thin HTTP client: by default it mounts the FastAPI app
in-process (no server needed); pass --server to target a running instance.

Exit codes: 0 a measure exists, 1 no measure, 2 undetermined, 3 input error.
"""

from __future__ import annotations

import json
import sys

import click
import httpx


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient
    from .service import app
    return TestClient(app)


def _load_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        click.echo(f"input error: {err}", err=True)
        sys.exit(3)


def _beta_of(data: dict) -> dict:
    return data.get("beta", data) if isinstance(data, dict) else data


def _post(ctx, path: str, payload: dict) -> dict:
    with _client(ctx.obj["server"]) as client:
        response = client.post(path, json=payload)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail", response.text)
    except json.JSONDecodeError:
        detail = response.text
    click.echo(f"input error: {detail}", err=True)
    sys.exit(3)


def _tolerances(ctx) -> dict:
    return {"tol_rank": ctx.obj["tol_rank"], "tol_psd": ctx.obj["tol_psd"],
            "tol_match": ctx.obj["tol_match"]}


_EXIT = {"exists": 0, "not-exists": 1, "undetermined": 2}


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Target a running service instead of the in-process app.")
@click.option("--tol-rank", default=1e-9, show_default=True,
              help="Relative eigenvalue cut for numerical rank.")
@click.option("--tol-psd", default=1e-9, show_default=True,
              help="Relative tolerance for positive semidefiniteness.")
@click.option("--tol-match", default=1e-8, show_default=True,
              help="Absolute tolerance for moment reconstruction.")
@click.option("--json", "as_json", is_flag=True,
              help="Emit the full JSON report instead of a table.")
@click.pass_context
def main(ctx, server, tol_rank, tol_psd, tol_match, as_json):
    """Singular bivariate quartic tracial moment problem solver."""
    ctx.ensure_object(dict)
    ctx.obj.update(server=server, tol_rank=tol_rank, tol_psd=tol_psd,
                   tol_match=tol_match, as_json=as_json)


def _print_measure(measure: dict):
    for atom in measure["atoms"]:
        size = len(atom["A"])
        click.echo(f"  atom size {size}  density {atom['density']:.12g}")
        if size == 1:
            click.echo(f"    point ({atom['A'][0][0]:.12g}, "
                       f"{atom['B'][0][0]:.12g})")
        else:
            click.echo(f"    A = {atom['A']}")
            click.echo(f"    B = {atom['B']}")


@main.command()
@click.argument("sequence", metavar="SEQUENCE_JSON")
@click.option("--lmi-grid", default=5, show_default=True,
              help="Grid resolution per LMI search dimension.")
@click.option("--lmi-iters", default=150, show_default=True,
              help="Local descent iterations per LMI search cell.")
@click.pass_context
def solve(ctx, sequence, lmi_grid, lmi_iters):
    """Decide whether the sequence admits a measure and construct one."""
    payload = {
        "beta": _beta_of(_load_json(sequence)),
        "tolerances": _tolerances(ctx),
        "budget": {"lmi_grid": lmi_grid, "lmi_iters": lmi_iters},
    }
    report = _post(ctx, "/solve", payload)
    if ctx.obj["as_json"]:
        click.echo(json.dumps(report, indent=2))
    else:
        click.echo(f"verdict       {report['verdict']}")
        click.echo(f"kind          {report['kind']}")
        click.echo(f"rank          {report['rank']}")
        click.echo(f"case          {report['case']}  ({report['method']})")
        if report.get("minimal_type"):
            click.echo(f"minimal type  {tuple(report['minimal_type'])}")
        click.echo(f"uniqueness    {report['uniqueness']}")
        if report.get("reconstruction_error") is not None:
            click.echo(f"recon error   {report['reconstruction_error']:.3e}")
        if report.get("measure"):
            click.echo("measure:")
            _print_measure(report["measure"])
    sys.exit(_EXIT.get(report["verdict"], 2))


@main.command()
@click.argument("sequence", metavar="SEQUENCE_JSON")
@click.argument("measure", metavar="MEASURE_JSON")
@click.pass_context
def verify(ctx, sequence, measure):
    """Check that a measure reproduces the sequence's moments."""
    payload = {
        "beta": _beta_of(_load_json(sequence)),
        "measure": _load_json(measure),
        "tolerances": _tolerances(ctx),
    }
    out = _post(ctx, "/verify", payload)
    if ctx.obj["as_json"]:
        click.echo(json.dumps(out, indent=2))
    else:
        status = "OK" if out["ok"] else "MISMATCH"
        click.echo(f"{status}  max moment error {out['max_error']:.3e} "
                   f"(tolerance {out['tolerance']:.1e})")
    sys.exit(0 if out["ok"] else 1)


@main.command()
@click.argument("sequence", metavar="SEQUENCE_JSON")
@click.pass_context
def reduce(ctx, sequence):
    """Print the affine chain onto a canonical case, as JSON."""
    payload = {"beta": _beta_of(_load_json(sequence)),
               "tolerances": _tolerances(ctx)}
    out = _post(ctx, "/reduce", payload)
    click.echo(json.dumps(out, indent=2))
    sys.exit(0)


@main.command(name="flat-check")
@click.argument("sequence", metavar="SEQUENCE_JSON")
@click.option("--relation", default=None,
              type=click.Choice(["REL1", "REL2", "REL3", "REL4"]),
              help="Basic relation; autodetected from the kernel if omitted.")
@click.pass_context
def flat_check(ctx, sequence, relation):
    """Search the flat-extension parameters; print the residual table."""
    payload = {"beta": _beta_of(_load_json(sequence)),
               "relation": relation, "tolerances": _tolerances(ctx)}
    out = _post(ctx, "/flat-check", payload)
    if ctx.obj["as_json"]:
        click.echo(json.dumps(out, indent=2))
    else:
        click.echo(f"relation  {out['relation']}")
        click.echo(f"feasible  {out['feasible']}")
        click.echo(f"params    {[round(v, 12) for v in out['params']]}")
        click.echo("residuals:")
        for name, value in out["residuals"].items():
            click.echo(f"  {name:<12} {value: .6e}")
    sys.exit(0 if out["feasible"] else 1)


@main.command(name="gen-random")
@click.argument("case", metavar="CASE")
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def gen_random_cmd(ctx, case, seed):
    """Generate a random measure and its moments for a canonical case."""
    out = _post(ctx, "/gen-random", {"case": case, "seed": seed})
    click.echo(json.dumps(out, indent=2))
    sys.exit(0)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the solver as an HTTP service."""
    import uvicorn

    uvicorn.run("tracmom.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
