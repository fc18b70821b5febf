"""Generate the two-state, three-year daily fixture and its expected seasonal table.

The expected values are computed here directly from the daily rows, independently
of the Rust implementation: daily mean (tmax+tmin)/2 against a 65 F base, monthly
sums over complete months, seasonal sums over complete seasons (DJF counted in
the year of its January), then an unweighted mean over the states of a region.
"""
import calendar
import csv
import datetime as dt
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
BASE = 65.0
STATES = {"AA": 0.0, "BB": 4.0}
REGION = "CEN"


def daily_rows(state, offset):
    rows = []
    day = dt.date(2001, 1, 1)
    d = 0
    while day.year <= 2003:
        doy = day.timetuple().tm_yday
        tmax = round(62 + offset + 25 * math.sin(2 * math.pi * (doy - 110) / 365.25) + ((d * 7) % 11 - 5), 1)
        tmin = round(tmax - (15 + (d * 3) % 7), 1)
        rain = (d * 13 % 17) * (0.5 + 0.1 * (day.year - 2001)) if d % 3 == 0 else 0.0
        rain = round(rain, 2)
        rain_s = f"{rain}"
        if state == "BB" and day == dt.date(2002, 4, 15):
            rain_s = ""
        if state == "BB" and day == dt.date(2003, 7, 4):
            tmax, tmin = tmin, tmax
        rows.append((day.isoformat(), tmax, tmin, rain_s))
        day += dt.timedelta(days=1)
        d += 1
    return rows


def season_of(year, month):
    if month == 12:
        return "winter", year + 1
    if month in (1, 2):
        return "winter", year
    if month in (3, 4, 5):
        return "spring", year
    if month in (6, 7, 8):
        return "summer", year
    return "autumn", year


SEASON_MONTHS = {
    "winter": lambda y: [(y - 1, 12), (y, 1), (y, 2)],
    "spring": lambda y: [(y, 3), (y, 4), (y, 5)],
    "summer": lambda y: [(y, 6), (y, 7), (y, 8)],
    "autumn": lambda y: [(y, 9), (y, 10), (y, 11)],
}


def monthly(rows):
    by_month = {}
    for date, tmax, tmin, rain in rows:
        if tmax < tmin:
            continue
        y, m = int(date[:4]), int(date[5:7])
        by_month.setdefault((y, m), []).append((tmax, tmin, rain))
    out = {}
    for (y, m), days in by_month.items():
        if len(days) != calendar.monthrange(y, m)[1]:
            continue
        temps = [(a + b) / 2.0 for a, b, _ in days]
        cdd = 0.0
        hdd = 0.0
        for t in temps:
            cdd += max(t - BASE, 0.0)
            hdd += max(BASE - t, 0.0)
        out[("CDD", y, m)] = cdd
        out[("HDD", y, m)] = hdd
        if all(r != "" for _, _, r in days):
            pre = 0.0
            for _, _, r in days:
                pre += float(r)
            out[("PRE", y, m)] = pre
    return out


def seasonal(month_vals):
    keys = set()
    for (var, y, m) in month_vals:
        s, sy = season_of(y, m)
        keys.add((var, sy, s))
    out = {}
    for var, sy, s in keys:
        months = SEASON_MONTHS[s](sy)
        if all((var, y, m) in month_vals for y, m in months):
            total = 0.0
            for y, m in months:
                total += month_vals[(var, y, m)]
            out[(var, sy, s)] = total
    return out


def main():
    per_state = {}
    for state, offset in STATES.items():
        rows = daily_rows(state, offset)
        with open(os.path.join(HERE, "daily", f"{state}.csv"), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["date", "tmax_f", "tmin_f", "rain_mm"])
            for r in rows:
                w.writerow(r)
        per_state[state] = seasonal(monthly(rows))
    with open(os.path.join(HERE, "regions.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["state", "region"])
        for s in STATES:
            w.writerow([s, REGION])

    keys = sorted({k for v in per_state.values() for k in v})
    order = {"winter": 0, "spring": 1, "summer": 2, "autumn": 3}
    var_order = {"CDD": 0, "HDD": 1, "PRE": 2}
    keys.sort(key=lambda k: (var_order[k[0]], k[1], order[k[2]]))
    with open(os.path.join(HERE, "expected_seasonal.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["region", "variable", "year", "season", "value", "n_states"])
        for var, y, s in keys:
            vals = sorted((st, per_state[st][(var, y, s)]) for st in STATES if (var, y, s) in per_state[st])
            total = 0.0
            for _, v in vals:
                total += v
            w.writerow([REGION, var, y, s, repr(total / len(vals)), len(vals)])


if __name__ == "__main__":
    main()
