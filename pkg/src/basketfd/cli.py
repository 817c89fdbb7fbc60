"""Command-line front end; a thin client over the HTTP service.

By default requests are served in process (no socket); pass --base-url to talk
to a running `basketfd serve` instance instead. Data artefacts go to the paths
named in the config; human-readable summaries go to stdout, errors to stderr
with a nonzero exit status.
"""

from __future__ import annotations

import click
import httpx

from .config import parse_config
from .errors import BasketFDError


def _parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise click.ClickException(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def _make_client(base_url):
    if base_url:
        return httpx.Client(base_url=base_url, timeout=None)
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(ctx, path: str, payload: dict) -> dict:
    with _make_client(ctx.obj["base_url"]) as client:
        resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
    return resp.json()


def _config_payload(ctx, extra: dict | None = None) -> dict:
    overrides = dict(ctx.obj["overrides"])
    if extra:
        overrides.update({k: v for k, v in extra.items() if v is not None})
    try:
        cfg = parse_config(ctx.obj["config_path"], overrides)
    except BasketFDError as exc:
        raise click.ClickException(str(exc))
    return cfg.model_dump()


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Flat key=value config file.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override a config key (repeatable); flags win over the file.")
@click.option("--base-url", default=None,
              help="URL of a running service; default runs in process.")
@click.pass_context
def main(ctx, config_path, overrides, base_url):
    """Two-asset basket put pricer (compact fourth-order scheme)."""
    ctx.ensure_object(dict)
    ctx.obj.update(
        config_path=config_path,
        overrides=_parse_overrides(overrides),
        base_url=base_url,
    )


@main.command()
@click.option("--s1", type=float, default=None, help="Spot of asset 1 (default: strike).")
@click.option("--s2", type=float, default=None, help="Spot of asset 2 (default: strike).")
@click.pass_context
def price(ctx, s1, s2):
    """Solve the PDE, write the final field CSV and print the price."""
    payload = _config_payload(ctx, {"s1": s1, "s2": s2})
    data = _post(ctx, "/price", {"config": payload})
    _write(payload["field_csv"], data["field_csv"])
    click.echo(f"price={data['price']:.17g}")


@main.command()
@click.option("--scheme", type=click.Choice(["hoc", "second_order"]), default=None)
@click.option("--baseline/--no-baseline", "baseline", default=None,
              help="Also run the second-order scheme for comparison.")
@click.pass_context
def converge(ctx, scheme, baseline):
    """Run the grid refinement study; write CSV and SVG, print fitted orders."""
    payload = _config_payload(ctx, {"scheme": scheme, "study_baseline": baseline})
    data = _post(ctx, "/converge", {"config": payload})
    _write(payload["report_csv"], data["csv"])
    _write(payload["report_svg"], data["svg"])
    for order in data["orders"]:
        click.echo(
            f"scheme={order['scheme']} rho={order['rho']:g} "
            f"order_linf={order['order_linf']:.3f} order_l2={order['order_rel_l2']:.3f}"
        )
    click.echo(f"wrote {payload['report_csv']} and {payload['report_svg']}")


@main.command("smooth-check")
@click.pass_context
def smooth_check(ctx):
    """Write a CSV comparing the raw and smoothed initial condition."""
    payload = _config_payload(ctx)
    data = _post(ctx, "/smooth-check", {"config": payload})
    _write(payload["smooth_csv"], data["csv"])
    click.echo(
        f"smoothed {data['band_nodes']} nodes, max |delta|={data['max_delta']:.6g}; "
        f"wrote {payload['smooth_csv']}"
    )


@main.command()
@click.option("--method", type=click.Choice(["quadrature", "mc"]), default="quadrature")
@click.option("--s1", type=float, default=None)
@click.option("--s2", type=float, default=None)
@click.option("--paths", type=int, default=None, help="Monte Carlo path count.")
@click.option("--seed", type=int, default=None, help="Monte Carlo seed.")
@click.pass_context
def oracle(ctx, method, s1, s2, paths, seed):
    """Print an independent reference price."""
    payload = _config_payload(ctx, {"s1": s1, "s2": s2, "mc_paths": paths,
                                    "mc_seed": seed})
    data = _post(ctx, "/oracle", {"config": payload, "method": method})
    if data["std_error"] is None:
        click.echo(f"price={data['price']:.17g}")
    else:
        click.echo(f"price={data['price']:.17g} std_error={data['std_error']:.17g}")


@main.group()
def stencil():
    """Stencil inspection utilities."""


@stencil.command()
@click.option("--scheme", type=click.Choice(["hoc", "second_order"]), default=None)
@click.pass_context
def dump(ctx, scheme):
    """Print both 3x3 coefficient arrays with 17 significant digits."""
    payload = _config_payload(ctx, {"scheme": scheme})
    data = _post(ctx, "/stencil-dump", {"config": payload})
    click.echo(data["text"], nl=False)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
