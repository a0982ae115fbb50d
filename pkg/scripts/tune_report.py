"""Catalog tuning harness: solve every pathway at 24 h resolution and print
the quantities the demonstration bands check.  Not part of the package."""

import sys
import time

from nearopt.chain import (
    PathwayConfig,
    build_pathway,
    capacities,
    cost_breakdown,
    energy_consumption,
    lcoe,
    lcoh,
    load_weather,
    to_lp,
)
from nearopt.costing import load_catalog
from nearopt.lp import solve

RES = 24


def main() -> None:
    catalog = load_catalog()
    weather = load_weather()
    results = {}
    for carrier in ("hydrogen", "ammonia", "methane", "methanol"):
        for transport in ("shipping", "pipeline"):
            cfg = PathwayConfig(carrier=carrier, transport=transport,
                                temporal_resolution=RES)
            graph = build_pathway(cfg, catalog, weather)
            lp = to_lp(graph, RES)
            t0 = time.time()
            sol = solve(lp)
            dt = time.time() - t0
            if sol.status != "optimal":
                print(f"{cfg.pathway:24s} {sol.status.upper()}")
                continue
            caps = capacities(sol, graph)
            results[cfg.pathway] = dict(
                lcoh=lcoh(sol, cfg),
                lcoe=lcoe(sol, graph),
                ratio=energy_consumption(sol, graph),
                caps=caps,
                breakdown=cost_breakdown(sol, graph),
                secs=dt,
                nvars=lp.n_vars,
            )
    for name, r in sorted(results.items()):
        caps = r["caps"]
        print(
            f"{name:22s} lcoh={r['lcoh']:7.2f} lcoe={r['lcoe']:7.2f} "
            f"ratio={r['ratio']:5.3f}  pv={caps['pv']:8.0f} wind={caps['wind']:8.0f} "
            f"elz={caps['electrolysis']:7.0f} bat={caps['battery']:9.1f} "
            f"h2st={caps['h2_storage']:9.0f}  [{r['secs']:5.1f}s n={r['nvars']}]"
        )
    print()
    hy = [r["lcoh"] for n, r in results.items() if n.startswith("hydrogen")]
    non = [r["lcoh"] for n, r in results.items() if not n.startswith("hydrogen")]
    print(f"max hydrogen lcoh {max(hy):.2f}  min non-hydrogen {min(non):.2f}")
    hr = [r["ratio"] for n, r in results.items() if n.startswith("hydrogen")]
    nr = [r["ratio"] for n, r in results.items() if not n.startswith("hydrogen")]
    print(f"hydrogen ratios {min(hr):.3f}..{max(hr):.3f} (need [1.4,2.2])")
    print(f"non-hydrogen    {min(nr):.3f}..{max(nr):.3f} (need [2.4,4.0])")
    for p in ("methanol_shipping", "methanol_pipeline"):
        if p in results:
            c = results[p]["caps"]
            print(f"{p}: battery={c['battery']:.1f} MWh h2_storage={c['h2_storage']:.1f} MWh")
            b = results[p]["breakdown"]
            print(f"   pv share={b['pv']:.2f} wind share={b['wind']:.2f} (need pv > wind)")


if __name__ == "__main__":
    main()


def probe_near_optimal(name: str = "hydrogen_shipping", eps: float = 0.1, res: int = 24) -> None:
    """Min/max each flexibility axis under a cost cap, previewing the MAA box."""
    from nearopt import chain, lp as lpmod

    carrier, transport = name.rsplit("_", 1)
    config = chain.PathwayConfig(
        carrier=carrier, transport=transport, temporal_resolution=res, slack_epsilon=eps
    )
    graph = chain.build_pathway(config, load_catalog(), load_weather())
    base = chain.to_lp(graph, config.temporal_resolution)
    opt = lpmod.solve(base)
    capped = lpmod.add_cost_cap(base, (1.0 + eps) * opt.objective_value)
    x_opt = {tag: opt.x[col] for tag, col in base.mga.items()}
    print(f"\n[{name} eps={eps}] f*={opt.objective_value:.6e}")
    for tag in base.mga:
        lo = lpmod.solve(lpmod.with_objective(capped, {tag: 1.0}))
        hi = lpmod.solve(lpmod.with_objective(capped, {tag: -1.0}))
        vmin, vmax = lo.x[base.mga[tag]], hi.x[base.mga[tag]]
        frac = vmin / vmax if vmax > 1e-9 else float("nan")
        ratio_opt = vmin / x_opt[tag] if x_opt[tag] > 1e-9 else float("nan")
        print(
            f"  {tag:<12} opt={x_opt[tag]:>10.1f} min={vmin:>10.1f} "
            f"max={vmax:>10.1f}  min/max={frac:7.4f} min/opt={ratio_opt:7.4f}"
        )


if "--probe" in sys.argv:
    probe_near_optimal()
