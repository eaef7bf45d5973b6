"""Independent numeric oracle used to freeze expected values in the C++ tests.

Straight-line arithmetic from the published nominal inputs and mode-shift rows; shares no
code with the C++ engine. Run: python3 tests/oracle/freeze_values.py
"""
import numpy as np
from scipy.optimize import least_squares

DAYS = 365.0
GRID = 386.0
SB = dict(life=3, daily=8.77, trips=2.5, base=188.0, aut=0.0, deliv_t=1.73, ops_t=6.62, reb=0.03, st=4.38e-6, mod=1.0, oh=0.0)
DL = dict(life=3, daily=3.84, trips=1.1, base=188.0, aut=0.0, deliv_t=3.96, ops_t=24.70, reb=0.1, st=None, mod=None, oh=0.0)
AU = dict(life=3, daily=42.23, trips=8.8, base=826.9 - 599.3, aut=599.3, deliv_t=0.52, ops_t=0.0, reb=0.0, st=2.5e-6, mod=40.4 / 30.8, oh=0.2171 + 0.0043)

# calibration
ei = 8.88 / GRID
A = np.array([[4.38e-6, 1.0], [2.5e-6, 40.4 / 30.8]])
E_st, r_road = np.linalg.solve(A, [39.77, 23.94])
print(f"energy_intensity {ei!r}")
print(f"station_gco2 {E_st!r} road {r_road!r}")
print(f"van sb {6.62/0.03!r} dl {24.70/0.1!r}")
for s in (SB, DL, AU):
    s["D"] = s["daily"] * DAYS * s["life"]
    s["deliv"] = s["deliv_t"] * s["D"] / 1000
    print(f"mileage {s['D']!r} delivery {s['deliv']!r}")
infra_sb = 4.38e-6 * E_st + r_road
SB["infra"] = infra_sb; DL["infra"] = infra_sb; AU["infra"] = 2.5e-6 * E_st + 40.4 / 30.8 * r_road
SB["van"] = 6.62 / 0.03; DL["van"] = 24.70 / 0.1; AU["van"] = 0.0


def breakdown(s, life=None, trips=None, grid=GRID, van=None, reb=None, strict=False, aut_scale=None, aut_fixed=0.0):
    life = s["life"] if life is None else life
    daily = s["daily"] if trips is None else s["daily"] * trips / s["trips"]
    D = daily * DAYS * life
    Dref = daily * DAYS * 3.0
    f = (1 - s["oh"]) if strict else 1.0
    aut = s["aut"] if aut_scale is None else aut_scale
    man = (s["base"] + aut) * 1000 / (D * f) + aut_fixed * 1000 / (Dref * f)
    dl = s["deliv"] * 1000 / (D * f)
    use = ei * grid / f
    ops = (s["reb"] if reb is None else reb) * (s["van"] if van is None else van)
    return np.array([man, dl, use, ops, s["infra"]])


tot = {}
for n, s in (("station_based", SB), ("dockless", DL), ("autonomous", AU)):
    b = breakdown(s)
    tot[n] = b.sum()
    print(n, [repr(x) for x in b], "total", repr(b.sum()))
T_sb, T_dl, T_au = tot["station_based"], tot["dockless"], tot["autonomous"]
print("compare sb", (T_sb - T_au) / T_sb * 100, "dl", (T_dl - T_au) / T_dl * 100)

# lifetime sweep
for n, s in (("station_based", SB), ("dockless", DL), ("autonomous", AU)):
    for L in (1, 5):
        print("lifetime", n, L, (breakdown(s, life=L).sum() / tot[n] - 1) * 100)
# alternate split: 1-year delta = 64.45 %
sc_pkm = 0.6445 * T_au / 2 - (AU["base"] * 1000 + AU["deliv"] * 1000) / AU["D"]
aut_sc = sc_pkm * AU["D"] / 1000
aut_fx = 599.3 - aut_sc
print("alt split", aut_sc, aut_fx)
for L in (1, 5):
    print("alt lifetime", L, (breakdown(AU, life=L, aut_scale=aut_sc, aut_fixed=aut_fx).sum() / T_au - 1) * 100)
# grid / vans
for n, s in (("station_based", SB), ("dockless", DL), ("autonomous", AU)):
    z = breakdown(s, grid=0).sum()
    zb = breakdown(s, grid=0, van=0).sum()
    print("grid", n, (z / tot[n] - 1) * 100, "further", (zb / z - 1) * 100)
# rebalancing 5 m/pkt
sb5 = breakdown(SB, reb=0.005).sum(); dl5 = breakdown(DL, reb=0.005).sum()
print("reb5 totals", sb5, dl5, "au lower", (sb5 - T_au) / sb5 * 100, (dl5 - T_au) / dl5 * 100)
# utilization 8.8
sb88 = breakdown(SB, trips=8.8).sum(); dl88 = breakdown(DL, trips=8.8).sum()
print("util8.8 totals", sb88, dl88, "au lower", (sb88 - T_au) / sb88 * 100, (dl88 - T_au) / dl88 * 100)
# breakeven (closed form for a/u + floor)
for strict in (False, True):
    b = breakdown(AU, strict=strict)
    a = (b[0] + b[1]) * AU["trips"]; floor = b[2:].sum()
    print("breakeven strict" if strict else "breakeven paper", a / (T_sb - floor), a / (T_dl - floor), "floor", floor)
au11 = breakdown(AU, trips=1.1).sum()
print("autonomous at 1.1 trips", au11, "vs sb", (au11 / T_sb - 1) * 100, "vs dl", (au11 / T_dl - 1) * 100)
# autonomy variations
st_term = 2.5e-6 * E_st
for lab, tot_v in (("infra_low", T_au - st_term / 2), ("infra_high", T_au + st_term * 0.75)):
    print(lab, tot_v, (tot_v / T_au - 1) * 100, "below sb", (T_sb - tot_v) / T_sb * 100, "below dl", (T_dl - tot_v) / T_dl * 100)
for k in (0.75, 1.25):
    v = breakdown(AU, aut_scale=599.3 * k).sum()
    print("autonomy", k, (v / T_au - 1) * 100)
for w in (30.8, 50.0):
    v = T_au + (w / 30.8 - 40.4 / 30.8) * r_road
    print("weight", w, (v / T_au - 1) * 100)
bat = 0.006 * T_au * AU["D"] / 1000 / (0.25 * 0.4896)
print("battery_kgco2_per_kwh", repr(bat))

# mode shift
rows = [l.split(",") for l in open(__file__.replace("freeze_values.py", "../../data/modeshift_profiles.csv")).read().splitlines() if l and not l.startswith("#")][1:]
S = {1: [162, 358, 91], 2: [108, 206, 52]}
E3 = [T_sb, T_dl, T_au]
R = []
for p in rows:
    sh = np.array([float(x) if x else 0.0 for x in p[1:7]]) / 100
    d = np.array([float(x) for x in p[7:13]])
    R.append((p[0], sh, d))


def resid(x):
    w, b = x; out = []
    for n, s, d in R:
        for sc in (1, 2):
            mix = s[:3] @ S[sc] + w * s[3] + b * s[4]
            for k in range(3):
                out.append((E3[k] - mix) / mix * 100 - d[2 * k + (sc - 1)])
    return np.array(out)


fit = least_squares(resid, [0, 0], bounds=([0, 0], [np.inf, np.inf]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
res = resid(fit.x)
print("fit walking/own_bike", repr(fit.x[0]), repr(fit.x[1]), "cost", 0.5 * (res ** 2).sum(), "cost0", 0.5 * (resid([0, 0]) ** 2).sum())
print("MAD", np.median(np.abs(res)))
for i, (n, s, d) in enumerate(R):
    if n in ("Paris", "Brisbane"):
        print(n, np.round(res[i * 6:i * 6 + 6], 4))
m1 = [s[:3] @ S[1] + fit.x[0] * s[3] + fit.x[1] * s[4] for n, s, d in R]
m2 = [s[:3] @ S[2] + fit.x[0] * s[3] + fit.x[1] * s[4] for n, s, d in R]
print("S1 median", np.median(m1), "S2 min", min(m2))
