"""How good is the greedy rule? Benchmark it against offline optimal dispatch.

The offline solver sees the whole window in advance and minimizes total L1
tracking error by linear programming (with a dynamic-programming fallback
when battery losses make the LP relaxation optimistic). Two regimes:

  1. State of charge stays strictly interior: the greedy rule is provably
     optimal, and the gap to the LP is numerical noise.
  2. The signal drags the battery into a limit: hindsight lets the offline
     solver pre-position energy, and a real gap opens.

Run:  python3 demos/03_offline_benchmark.py
"""

import numpy as np

from hes_regkit import (
    BatteryParams,
    GeneratorParams,
    HesConfig,
    LoadParams,
    benchmark_controller,
    closed_form_dispatch,
    synth_signal,
)

cfg = HesConfig(
    gen=GeneratorParams(p_max=3.0),
    load=LoadParams(p_max=3.0),
    batt=BatteryParams(p_max=5.0, energy_capacity=5.0, eta_c=0.95, eta_d=0.95,
                       soc_min=0.1, soc_max=0.9, soc_init=0.5),
    dt=2.0 / 3600.0,
)

print("regime 1: energy-neutral hour, C = 12 MW, 2-second steps")
sig = synth_signal("energy-neutral-random", n=1800, dt=cfg.dt, seed=3)
rep = benchmark_controller(cfg, 12.0, sig)
print(f"  rule error J_on      : {rep.j_on:.6f} MW")
print(f"  offline error J_off  : {rep.j_off:.6f} MW   (path: {rep.solver_path})")
print(f"  gap                  : {rep.gap:.2e}")
print(f"  interior certificate : {rep.hypothesis_held}")
print(f"  closed form applies  : {closed_form_dispatch(cfg, 12.0, sig) is not None}")

print("\nregime 2: persistently negative signal on 3-minute steps, C = 12.21 MW")
slow = HesConfig(gen=cfg.gen, load=cfg.load, batt=cfg.batt, dt=0.05)
drift = synth_signal("drifting", n=60, dt=slow.dt, seed=20260814, bias=-0.7, noise=0.3)
rep2 = benchmark_controller(slow, 12.21, drift)
print(f"  rule error J_on      : {rep2.j_on:.4f} MW")
print(f"  offline error J_off  : {rep2.j_off:.4f} MW   (path: {rep2.solver_path})")
print(f"  gap                  : {rep2.gap:.4f} ({100 * rep2.gap / rep2.j_off:.1f}% worse)")
print(f"  interior certificate : {rep2.hypothesis_held}")

print("""
The first case is the normal operating point: the rule gives up nothing for
being causal, which is what justifies bidding with the cheap rule in the
loop instead of a solver. The second case charges the battery full; once a
limit binds, foresight starts to pay and the certificate correctly reports
that the optimality argument no longer applies.
""".rstrip())
