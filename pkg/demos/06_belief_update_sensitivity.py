"""How the discount factor responds to revised hazard beliefs.

Comparing a marginal increase in perceived extinction risk M against an
equal-sized increase in perceived personal mortality m, in two regimes:
b-fixed (the birth rate stays put, so population growth absorbs the m shock)
and n-fixed (births adjust to hold population growth constant). Once any
intergenerational altruism is present and reproduction is predetermined,
the extinction update moves the factor at least as much as the mortality
update: reproduction hedges m but cannot hedge M. Higher impatience makes
long-horizon mitigation investments less attractive, so acknowledging more
extinction risk weakens the incentive to spend on reducing it.
"""

from extrisk import (
    DYNASTY,
    DYNASTY_THETA,
    INDIVIDUAL,
    LINEAGE,
    SOCIAL_WELFARE,
    HazardParams,
    belief_update_response,
)

params = HazardParams(m=0.02, M=0.01, theta=0.5, alpha=0.5).with_n_zero()
print(f"constant-population baseline: m={params.m} M={params.M} b={params.b:.6f}\n")

for regime_name in ("b-fixed", "n-fixed"):
    print(f"regime: {regime_name}")
    print(f"  {'case':<16s} {'d factor/dM':>12s} {'d factor/dm':>12s} {'ratio |M/m|':>12s}")
    for case in (INDIVIDUAL, DYNASTY, DYNASTY_THETA, LINEAGE, SOCIAL_WELFARE):
        rep = belief_update_response(case, params)
        reg = rep.b_fixed if regime_name == "b-fixed" else rep.n_fixed
        if reg.d_factor_d_m != 0.0:
            ratio = f"{abs(reg.d_factor_d_M / reg.d_factor_d_m):>12.3f}"
        else:
            ratio = f"{'inf':>12s}"
        print(f"  {case.kind:<16s} {reg.d_factor_d_M:>12.6f} {reg.d_factor_d_m:>12.6f} {ratio}")
    print()

rep = belief_update_response(DYNASTY, params)
print("closed forms vs central finite differences (dynasty, n-fixed):")
print(f"  dM: closed {rep.n_fixed.d_factor_d_M:+.9f}  fd {rep.n_fixed.fd_d_factor_d_M:+.9f}")
print(f"  dm: closed {rep.n_fixed.d_factor_d_m:+.9f}  fd {rep.n_fixed.fd_d_factor_d_m:+.9f}")
print("\nwith reproduction predetermined, mortality updates leave the dynasty's")
print("factor untouched while extinction updates lower it one for one: the more")
print("extinction risk people believe in, the heavier they discount the future.")
