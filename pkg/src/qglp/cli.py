"""Command-line client for the analysis service.

Every subcommand builds a request, sends it through the service API (an
in-process ASGI client by default, or a remote server via --url) and
renders the response.  Exit codes: 0 success / certified true, 2
mathematically negative or indeterminate, 1 input or runtime errors, 3
internal consistency failure (cross-checked routes disagree).
"""

from __future__ import annotations

import json
import os
import sys

import click

from .io import canonical_json

DEFAULT_TOL = float(os.environ.get("QGLP_TOL", "1e-9"))

_EXIT_BY_STATUS = {
    "ok": 0,
    "negative": 2,
    "indeterminate": 2,
    "invalid": 1,
    "inconsistent": 3,
    "error": 1,
}


def _client(url):
    if url:
        import httpx

        return httpx.Client(base_url=url, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(1)


def _post(ctx, endpoint, payload):
    with _client(ctx.obj.get("url")) as client:
        resp = client.post(endpoint, json=payload)
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        click.echo(f"error ({resp.status_code}): {detail}", err=True)
        sys.exit(1)
    return resp.json()


def _finish(body, report_format, render):
    if report_format == "json":
        click.echo(canonical_json(body), nl=False)
    else:
        render(body["report"], body["status"])
    sys.exit(_EXIT_BY_STATUS.get(body["status"], 1))


report_option = click.option(
    "--report", "report_format", type=click.Choice(["text", "json"]), default="text"
)


@click.group()
@click.option("--url", default=None, help="remote service URL (default: in-process)")
@click.pass_context
def main(ctx, url):
    """Noncommutative L_p analysis on finite quantum groups."""
    ctx.ensure_object(dict)
    ctx.obj["url"] = url


@main.command()
@click.argument("qg_file")
@report_option
@click.pass_context
def validate(ctx, qg_file, report_format):
    """Check the quantum-group axioms of a {blocks, weights, delta} file."""
    payload = {"qgroup": _load(qg_file)}
    body = _post(ctx, "/qgroup/validate", payload)

    def render(report, status):
        for check in report["checks"]:
            mark = "pass" if check["passed"] else "FAIL"
            note = f"  ({check['note']})" if check.get("note") else ""
            click.echo(f"  {mark}  {check['name']}: residual {check['residual']:.3e}{note}")
        click.echo(f"result: {'valid quantum group' if status == 'ok' else 'INVALID'}")

    _finish(body, report_format, render)


@main.command()
@click.argument("qg_file")
@report_option
@click.pass_context
def haar(ctx, qg_file, report_format):
    """Print the Haar state of a quantum group."""
    body = _post(ctx, "/qgroup/haar", {"qgroup": _load(qg_file)})

    def render(report, status):
        click.echo(f"{report['name']}: blocks {report['blocks']}")
        click.echo(f"faithful: {report['faithful']}")
        vals = [f"{v[0]:+.6f}{v[1]:+.6f}i" for v in report["covector"]]
        click.echo("values on matrix units: " + ", ".join(vals))

    _finish(body, report_format, render)


@main.command()
@click.argument("qg_file")
@click.option("--entries", is_flag=True, help="include corepresentation entries")
@report_option
@click.pass_context
def irreps(ctx, qg_file, entries, report_format):
    """Peter-Weyl decomposition: irreducible corepresentations and residuals."""
    body = _post(
        ctx, "/qgroup/irreps", {"qgroup": _load(qg_file), "include_entries": entries}
    )

    def render(report, status):
        click.echo(f"{report['name']}: irrep dimensions {report['dims']}")
        click.echo(
            f"sum of squares {report['dimension_count']} = dim(A) {report['algebra_dim']}"
        )
        for key in ("coaction_residual", "unitarity_residual", "orthogonality_residual"):
            click.echo(f"{key}: {report[key]:.3e}")

    _finish(body, report_format, render)


@main.command()
@click.argument("qg_file")
@click.argument("input_file")
@click.option("--kind", type=click.Choice(["element", "state"]), default="element")
@report_option
@click.pass_context
def fourier(ctx, qg_file, input_file, kind, report_format):
    """Fourier coefficients and norm summary of an element or state."""
    body = _post(
        ctx,
        "/fourier",
        {"qgroup": _load(qg_file), "input": _load(input_file), "kind": kind},
    )

    def render(report, status):
        click.echo(f"{report['name']}: {report['kind']} transform")
        dims = report["coefficients"]["alpha_dims"]
        for idx, (d, mat, nrm) in enumerate(
            zip(dims, report["coefficients"]["matrices"], report["operator_norms"])
        ):
            click.echo(f"  irrep {idx} (dim {d}): operator norm {nrm:.6f}")
            for row in mat:
                click.echo(
                    "    [" + ", ".join(f"{z[0]:+.4f}{z[1]:+.4f}i" for z in row) + "]"
                )
        click.echo(f"dual l2 norm: {report['dual_l2_norm']:.8f}")
        if "element_l2_norm" in report:
            click.echo(
                f"element l2 norm: {report['element_l2_norm']:.8f} "
                f"(plancherel residual {report['plancherel_residual']:.2e})"
            )

    _finish(body, report_format, render)


@main.command()
@click.argument("qg_file")
@click.argument("state_file")
@click.option("--samples", default=10000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--tol", default=DEFAULT_TOL, show_default=True)
@report_option
@click.pass_context
def improve(ctx, qg_file, state_file, samples, seed, tol, report_format):
    """Five-condition certification of an L_p-improving convolution state."""
    body = _post(
        ctx,
        "/improve",
        {
            "qgroup": _load(qg_file),
            "state": _load(state_file),
            "samples": samples,
            "seed": seed,
            "tol": tol,
        },
    )

    def render(report, status):
        click.echo(f"{report['name']}:")
        for label, value in report["conditions"].items():
            click.echo(f"  {label}: {value}")
        click.echo(f"spectral gap lambda = {report['spectral_gap']:.9f}")
        if report["witness_exponent"] is not None:
            click.echo(
                f"witness p = {report['witness_exponent']:.6f}"
                f" with c_p = {report['cp_at_witness']:.6f}"
                f" (lambda c_p < sqrt(p-1))"
            )
            click.echo(
                f"max sample slack: left {report['max_slack_left']:.2e}, "
                f"right {report['max_slack_right']:.2e} "
                f"({report['samples']} samples, seed {report['seed']})"
            )
        norms = ", ".join(f"{v:.6f}" for v in report["fourier_operator_norms"])
        click.echo(f"per-irrep Fourier norms: {norms}")
        if report["indeterminate"]:
            click.echo("verdict: numerically indeterminate (tie at tolerance)")
        elif not report["consistent"]:
            click.echo("verdict: INTERNAL CONSISTENCY FAILURE (conditions disagree)")
        else:
            click.echo(f"verdict: {'improving' if report['improving'] else 'not improving'}")

    _finish(body, report_format, render)


@main.command()
@click.argument("cayley_file")
@click.option("--support", required=True, help="comma-separated element indices")
@report_option
@click.pass_context
def ritter(ctx, cayley_file, support, report_format):
    """Subgroup test: does { i^{-1} j : i,j in support } generate the group?"""
    table = _load(cayley_file)
    table = table.get("cayley", table) if isinstance(table, dict) else table
    idx = [int(s) for s in support.split(",") if s.strip() != ""]
    body = _post(ctx, "/ritter", {"cayley": table, "support": idx})

    def render(report, status):
        click.echo(
            f"support {report['support']} generates the group of order "
            f"{report['group_order']}: {report['generates']}"
        )

    _finish(body, report_format, render)


@main.command()
@click.argument("cayley_file")
@click.argument("phi_file")
@click.option("--cross-check-samples", default=2000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@report_option
@click.pass_context
def schur(ctx, cayley_file, phi_file, cross_check_samples, seed, report_format):
    """Fourier-Schur multiplier criterion for a positive definite function."""
    table = _load(cayley_file)
    table = table.get("cayley", table) if isinstance(table, dict) else table
    phi = _load(phi_file)
    phi = phi.get("values", phi) if isinstance(phi, dict) else phi
    body = _post(
        ctx,
        "/schur",
        {
            "cayley": table,
            "values": phi,
            "cross_check_samples": cross_check_samples,
            "seed": seed,
        },
    )

    def render(report, status):
        click.echo(f"max |phi| off identity: {report['max_off_identity']:.9f}")
        click.echo(f"L_p-improving multiplier: {report['improving']}")
        if report.get("cross_check"):
            click.echo(
                f"five-condition cross-check agrees: "
                f"{report['cross_check']['improving'] == report['improving']}"
            )

    _finish(body, report_format, render)


@main.command()
@click.argument("qg_file")
@click.argument("state_file")
@click.option("--iterations", default=1000, show_default=True)
@report_option
@click.pass_context
def cesaro(ctx, qg_file, state_file, iterations, report_format):
    """Cesaro limit of the convolution powers of a state."""
    body = _post(
        ctx,
        "/cesaro",
        {
            "qgroup": _load(qg_file),
            "state": _load(state_file),
            "iterations": iterations,
        },
    )

    def render(report, status):
        click.echo(f"{report['name']}:")
        click.echo(f"  limit is Haar state: {report['is_haar']}")
        click.echo(f"  non-degenerate: {report['nondegenerate']}")
        click.echo(f"  distance to Haar: {report['distance_to_haar']:.3e}")
        click.echo(f"  fixed space dimension: {report['fixed_space_dim']}")
        click.echo(f"  iterative cross-check residual: {report['iterative_residual']:.3e}")

    _finish(body, report_format, render)


@main.command("hopf-image")
@click.argument("qg_file")
@click.argument("hom_file")
@click.option("--state", "state_file", default=None, help="faithful state on the target")
@report_option
@click.pass_context
def hopf_image_cmd(ctx, qg_file, hom_file, state_file, report_format):
    """Hopf image of a *-homomorphism and its idempotent state."""
    payload = {"qgroup": _load(qg_file), "hom": _load(hom_file)}
    if state_file:
        payload["state"] = _load(state_file)
    body = _post(ctx, "/hopf-image", payload)

    def render(report, status):
        click.echo(f"{report['name']}:")
        click.echo(
            f"  quotient dimension {report['quotient_dim']}, blocks {report['quotient_blocks']}"
        )
        click.echo(f"  ideal dimension {report['ideal_dim']}")
        click.echo(f"  kernel-intersection dims: {report['intersection_dims']}")
        click.echo(f"  two idempotent-state computations agree: {report['agreement']:.2e}")
        click.echo(f"  idempotency residual: {report['idempotent_residual']:.2e}")

    _finish(body, report_format, render)


@main.group()
def freeprod():
    """Word-level free product verification."""


@freeprod.command("verify")
@click.option("--components", multiple=True, required=True, help="component JSON files")
@click.option("--maps", multiple=True, required=True, help="component map JSON files")
@click.option("--q", default="auto", show_default=True)
@click.option("--len", "max_len", default=3, show_default=True)
@click.option("--samples", default=200, show_default=True)
@click.option("--seed", default=0, show_default=True)
@report_option
@click.pass_context
def freeprod_verify(ctx, components, maps, q, max_len, samples, seed, report_format):
    """Verify the free-product improvement inequalities on sampled words."""
    body = _post(
        ctx,
        "/freeprod/verify",
        {
            "components": [_load(c) for c in components],
            "maps": [_load(m) for m in maps],
            "q": q,
            "max_len": max_len,
            "samples": samples,
            "seed": seed,
        },
    )

    def render(report, status):
        click.echo(
            f"q = {report['q']}, lambda = {report['lambda']:.6f}, "
            f"c = {report['c']:.4f}, n = {report['n']}, m = {report['m']}"
        )
        click.echo(
            f"max slacks: adjoint {report['max_adjoint_slack']:.2e}, "
            f"claim {report['max_claim_slack']:.2e}, "
            f"contraction {report['max_contraction_slack']:.2e}"
        )
        click.echo(
            f"violations: {len(report['violations'])} over {report['samples']} samples "
            f"(seed {report['seed']}, length <= {report['max_len']})"
        )

    _finish(body, report_format, render)


@main.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--samples", default=300, show_default=True)
@report_option
@click.pass_context
def selftest(ctx, seed, samples, report_format):
    """Run every invariant suite at reduced scale."""
    body = _post(ctx, "/selftest", {"seed": seed, "samples": samples})

    def render(report, status):
        for suite in report["suites"]:
            mark = "pass" if suite["ok"] else "FAIL"
            click.echo(
                f"  {mark}  {suite['name']} ({suite['seconds']}s): {suite['detail']}"
            )
        click.echo(f"selftest: {'all suites pass' if report['ok'] else 'FAILURES'}")

    _finish(body, report_format, render)


@main.command()
@click.option("--cyclic", type=int, default=None, help="cyclic group Z_n")
@click.option("--symmetric", type=int, default=None, help="symmetric group S_n")
@click.option("--cayley", "cayley_file", default=None, help="Cayley table JSON")
@click.option("--kind", type=click.Choice(["function", "group"]), default="function")
@click.option("--name", default=None)
@click.option("-o", "--output", default=None, help="write the quantum group JSON here")
@click.pass_context
def build(ctx, cyclic, symmetric, cayley_file, kind, name, output):
    """Construct a quantum group file from a group table."""
    from . import groups as _groups

    given = [v is not None for v in (cyclic, symmetric, cayley_file)]
    if sum(given) != 1:
        click.echo("error: give exactly one of --cyclic, --symmetric, --cayley", err=True)
        sys.exit(1)
    if cyclic is not None:
        table = _groups.cyclic_table(cyclic)
    elif symmetric is not None:
        table = _groups.symmetric_table(symmetric)
    else:
        raw = _load(cayley_file)
        table = raw.get("cayley", raw) if isinstance(raw, dict) else raw
    body = _post(ctx, "/qgroup/build", {"cayley": table, "kind": kind, "name": name})
    text = canonical_json(body["report"])
    if output:
        with open(output, "w") as fh:
            fh.write(text)
        click.echo(f"wrote {output}")
    else:
        click.echo(text, nl=False)
    sys.exit(0)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the analysis service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
