"""Social welfare three ways, and its time-varying discount profile.

W(0, T) adds up, over everyone present before the extinction date T, the
expected remaining utility of their lives. Expected social welfare EW mixes
W(0, T) over the geometric extinction law, and has a closed series form, an
n = 0 simplification, and the mixture definition itself; all three agree
within their reported bounds. Unlike the other perspectives the per-period
weight ratio is not constant: it starts high and falls geometrically to
(1-M)(1-m)(1+b), the dynasty factor.
"""

from extrisk import (
    ConsumptionPath,
    HazardParams,
    UtilitySpec,
    discount_profile,
    ew_social,
    ew_social_mixture,
    ew_social_n0_form,
    welfare_window,
    welfare_window_direct,
)

u = UtilitySpec.linear()
one = ConsumptionPath.constant(1.0)

params = HazardParams(m=0.02, M=0.01).with_n_zero()  # constant population
print(f"constant-population economy: m={params.m}, M={params.M}, b={params.b:.6f}")

print("\nwelfare windows W(0, T), closed form vs direct double sum:")
for T in (0, 10, 100):
    closed = welfare_window(params, T, one, u)
    direct = welfare_window_direct(params, T, one, u)
    print(f"  T={T:<4d} closed={closed:>12.6f} direct={direct:>12.6f} "
          f"diff={abs(closed - direct):.2e}")

a = ew_social(params, one, u)
b = ew_social_n0_form(params, one, u)
c = ew_social_mixture(params, one, u)
print("\nexpected social welfare EW (unit utility):")
print(f"  closed series        {a.value:.8f}  (bound {a.tail_bound:.1e})")
print(f"  n=0 simplification   {b.value:.8f}  (bound {b.tail_bound:.1e})")
print(f"  mixture over T       {c.value:.8f}  (bound {c.tail_bound:.1e})")

growing = HazardParams(m=0.02, M=0.01, b=0.03)
prof = discount_profile(growing, 2001)
print(f"\ndiscount-ratio profile for growing population (b={growing.b}):")
print("  t      ratio        distance to long run")
for t in (0, 1, 5, 20, 100, 500, 2000):
    print(f"  {t:<6d} {prof.ratios[t]:.9f}  {prof.ratios[t] - prof.long_run:.3e}")
print(f"  long-run factor (1-M)(1-m)(1+b) = {prof.long_run:.9f}")
