#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under fixtures/.

Two datasets are produced:
  * palghar: a district-scale service fixture (boundary box, a handful of
    distant low-power transmitters, and one fully-occupied cluster used to
    exercise the no-spectrum error path), plus a mesh scenario and a link
    request set anchored on the Khamloli point of presence.
  * india: a country-scale registry of 373 synthetic transmitters, at most
    two channels per region, used by the grid statistics checks.

All transmitter data is synthetic. Coordinates are chosen so that the
pairwise distances the tests rely on hold exactly under the spherical
haversine metric (R = 6371 km).
"""
import json
import math
import random
from pathlib import Path

R_KM = 6371.0
OUT = Path(__file__).resolve().parent.parent / "fixtures"

def haversine_km(a, b):
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    dp = math.radians(b[0] - a[0])
    dl = math.radians(b[1] - a[1])
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * R_KM * math.asin(math.sqrt(h))

def destination(origin, bearing_deg, dist_km):
    """Spherical destination point, then rounded to 6 decimals."""
    lat1 = math.radians(origin[0])
    lon1 = math.radians(origin[1])
    brg = math.radians(bearing_deg)
    ang = dist_km / R_KM
    lat2 = math.asin(math.sin(lat1) * math.cos(ang) +
                     math.cos(lat1) * math.sin(ang) * math.cos(brg))
    lon2 = lon1 + math.atan2(math.sin(brg) * math.sin(ang) * math.cos(lat1),
                             math.cos(ang) - math.sin(lat1) * math.sin(lat2))
    return (round(math.degrees(lat2), 6), round(math.degrees(lon2), 6))

def fspl_db(d_km, f_mhz):
    return 32.44 + 20 * math.log10(d_km) + 20 * math.log10(f_mhz)

def hata_open_db(d_km, f_mhz, hb_m, hm_m):
    d = min(max(d_km, 1.0), 20.0)
    f = min(max(f_mhz, 150.0), 1500.0)
    hb = min(max(hb_m, 30.0), 200.0)
    hm = min(max(hm_m, 1.0), 10.0)
    lf = math.log10(f)
    a_hm = (1.1 * lf - 0.7) * hm - (1.56 * lf - 0.8)
    l_urban = (69.55 + 26.16 * lf - 13.82 * math.log10(hb) - a_hm +
               (44.9 - 6.55 * math.log10(hb)) * math.log10(d))
    return l_urban - 4.78 * lf * lf + 18.33 * lf - 40.94

def channel_center_mhz(index):
    return 470.0 + 8.0 * (index - 1) + 4.0

def point_in_polygon(pt, poly):
    lat, lon = pt
    inside = False
    n = len(poly)
    for i in range(n):
        la1, lo1 = poly[i]
        la2, lo2 = poly[(i + 1) % n]
        if (lo1 > lon) != (lo2 > lon):
            t = (lon - lo1) / (lo2 - lo1)
            if lat < la1 + t * (la2 - la1):
                inside = not inside
    return inside

def write_csv(path, rows):
    with open(path, "w") as f:
        f.write("tower_id,lat_deg,lon_deg,channel_index,erp_dbm,antenna_height_m\n")
        for r in rows:
            f.write("%s,%s,%s,%d,%s,%s\n" % r)

# ---------------------------------------------------------------- palghar ---

KHAMLOLI = (19.69, 72.77)
PALGHAR_BOUNDARY = [[19.35, 72.45], [19.35, 73.15], [20.05, 73.15], [20.05, 72.45]]

# Fully-occupied cluster: one mast per channel ~30 km north of Khamloli.
# ERP is low enough that beyond the 20 km model clamp the predicted level
# stays under the -114 dBm protection threshold, so the rest of the
# district still sees a clean band.
OCCUPIED_POINT = (19.96, 72.77)
CLUSTER_SITE = destination(OCCUPIED_POINT, 90.0, 1.0)
CLUSTER_ERP = 15.0

# Distant flavor transmitters, all far outside the district.
FAR_TOWERS = [
    ("NAS-01", 19.9975, 73.7898, 2, 12.0, 30.0),   # ~107 km ENE
    ("PUN-01", 18.5204, 73.8567, 5, 10.0, 30.0),   # ~170 km SE
    ("SUR-01", 21.1702, 72.8311, 8, 12.0, 30.0),   # ~165 km N
    ("AUR-01", 19.8762, 75.3433, 11, 8.0, 30.0),   # ~270 km E
    ("KOL-01", 16.7050, 74.2433, 13, 10.0, 30.0),  # ~360 km SSE
    ("AHM-01", 23.0225, 72.5714, 15, 12.0, 30.0),  # ~370 km N
]

def palghar_towers():
    rows = []
    for ch in range(1, 16):
        rows.append(("OCC-%02d" % ch, CLUSTER_SITE[0], CLUSTER_SITE[1], ch,
                     CLUSTER_ERP, 30.0))
    rows.extend(FAR_TOWERS)
    return rows

def verify_palghar(rows):
    thr = -114.0
    for name, pt in (("khamloli", KHAMLOLI),
                     ("sw-corner", (19.40, 72.50)),
                     ("se-corner", (19.40, 73.10))):
        worst = -1e9
        for (_, la, lo, ch, erp, hb) in rows:
            d = haversine_km(pt, (la, lo))
            rx = erp - hata_open_db(d, channel_center_mhz(ch), hb, 5.0)
            worst = max(worst, rx)
        assert worst < thr - 1.5, (name, worst)
        print("  palghar %-9s worst predicted %.2f dBm (threshold %.0f)" % (name, worst, thr))
    # the occupied point must be blocked on every channel
    for ch in range(1, 16):
        d = haversine_km(OCCUPIED_POINT, CLUSTER_SITE)
        rx = CLUSTER_ERP - hata_open_db(d, channel_center_mhz(ch), 30.0, 5.0)
        assert rx > thr + 3.0, (ch, rx)
    print("  palghar occupied point blocked on all 15 channels")

SCENARIO_NODES = [
    # (id, role, bearing_deg, dist_km, height_m, bw_mhz)
    ("Khamloli",   "pop",         None, 0.0, 30.0, 8.0),
    ("Ganje",      "base-station", 90.0, 6.7, 30.0, 5.0),
    ("Pargaon",    "base-station", 210.0, 6.7, 30.0, 5.0),
    ("Maswan",     "base-station", 330.0, 4.2, 30.0, 5.0),
    ("Haloli",     "base-station", 135.0, 3.1, 30.0, 5.0),
    ("Khamloli-1", "client",       80.0, 0.6, 5.0, 8.0),
    ("Khamloli-2", "client",      250.0, 0.9, 5.0, 8.0),
    ("Bahadoli-1", "client",       15.0, 1.6, 5.0, 8.0),
    ("Bahadoli-2", "client",       40.0, 1.9, 5.0, 8.0),
    ("Dhuktan-1",  "client",      300.0, 2.3, 5.0, 20.0),
    ("Dhuktan-2",  "client",      285.0, 2.5, 5.0, 8.0),
    ("Dhuktan-3",  "client",      315.0, 2.6, 5.0, 8.0),
]

def palghar_scenario():
    nodes = []
    for (nid, role, brg, dist, h, bw) in SCENARIO_NODES:
        loc = KHAMLOLI if brg is None else destination(KHAMLOLI, brg, dist)
        if brg is not None:
            err = abs(haversine_km(KHAMLOLI, loc) - dist)
            assert err < 5e-4, (nid, err)
        nodes.append({
            "id": nid, "role": role,
            "lat": loc[0], "lon": loc[1],
            "heightM": h, "gainDbi": 8.0, "txPowerDbm": 27.0,
            "bandwidthMhz": bw,
        })
    return {
        "name": "palghar-backhaul",
        "profile": "802.11af",
        "maxLinkKm": 8.0,
        "interferenceRadiusKm": 10.0,
        "nodes": nodes,
    }

def palghar_config(towers_csv):
    return {
        "regulatory": {
            "protectionThresholdDbm": -114.0,
            "channelCount": 15,
            "bandLowMhz": 470.0,
            "bandHighMhz": 590.0,
            "maxSecondaryEirpDbm": 30.0,
            "scheduleHorizonHours": 48,
            "locationAccuracyM": 50.0,
            "boundary": PALGHAR_BOUNDARY,
        },
        "pathLoss": {"model": "hata-open", "txHeightM": 30.0, "rxHeightM": 5.0,
                     "minDistanceKm": 0.01},
        "towersCsv": towers_csv,
        "bind": "127.0.0.1:8054",
        "logFile": "paws-log.jsonl",
    }

def palghar_links():
    # The four long-distance base-station links, all sharing the PoP site.
    scenario = palghar_scenario()
    by_id = {n["id"]: n for n in scenario["nodes"]}
    reqs = []
    for peer in ("Maswan", "Haloli", "Ganje", "Pargaon"):
        n = by_id[peer]
        reqs.append({
            "id": "Khamloli--%s" % peer,
            "a": {"lat": KHAMLOLI[0], "lon": KHAMLOLI[1]},
            "b": {"lat": n["lat"], "lon": n["lon"]},
            "bandwidthMhz": n["bandwidthMhz"],
            "operator": "palghar-pilot",
        })
    return {"interferenceRadiusKm": 10.0, "requests": reqs}

# ------------------------------------------------------------------ india ---

INDIA_BOUNDARY = [
    [8.0, 77.5], [16.0, 82.0], [22.0, 88.0], [27.0, 92.0], [29.0, 88.0],
    [34.0, 78.0], [32.0, 74.0], [27.0, 70.0], [21.0, 69.0], [15.0, 74.0],
]
INDIA_BBOX = (8.0, 68.0, 34.0, 92.0)  # lat_min, lon_min, lat_max, lon_max

# Region channel pairs: column parity alternates the pair so any overlap
# zone unions to at most three distinct channels.
PAIR_EVEN = (4, 9)
PAIR_ODD = (7, 9)

def india_towers():
    rng = random.Random(20160815)
    centers = []
    lat = 9.5
    row = 0
    while lat < 34.0:
        lon = 69.5 + (1.75 if row % 2 else 0.0)
        col = 0
        while lon < 92.0:
            if point_in_polygon((lat, lon), INDIA_BOUNDARY):
                centers.append((lat, lon, col))
            lon += 3.5
            col += 1
        lat += 3.0
        row += 1
    rows = []
    # Column-seam sites where the {4,9} and {7,9} region pairs meet, so the
    # sweep actually observes the 12-channel floor somewhere.
    for k, (la, lo) in enumerate([(21.5, 78.0), (24.5, 81.5)]):
        rows.append(("DD-%04d" % (len(rows) + 1), la, lo - 0.4, 4, 14.0, 60.0))
        rows.append(("DD-%04d" % (len(rows) + 1), la, lo + 0.4, 7, 14.0, 60.0))
        rows.append(("DD-%04d" % (len(rows) + 1), la, lo, 9, 14.0, 60.0))
    i = 0
    total = 373
    while len(rows) < total:
        (clat, clon, col) = centers[i % len(centers)]
        pair = PAIR_EVEN if col % 2 == 0 else PAIR_ODD
        ch = pair[len(rows) % 2]
        la = round(clat + rng.uniform(-0.8, 0.8), 4)
        lo = round(clon + rng.uniform(-0.8, 0.8), 4)
        erp = round(rng.uniform(6.0, 14.0), 1)
        h = round(rng.uniform(30.0, 100.0), 1)
        rows.append(("DD-%04d" % (len(rows) + 1), la, lo, ch, erp, h))
        i += 1
    return rows

def india_config(towers_csv):
    return {
        "regulatory": {
            "protectionThresholdDbm": -114.0,
            "channelCount": 15,
            "bandLowMhz": 470.0,
            "bandHighMhz": 590.0,
            "maxSecondaryEirpDbm": 30.0,
            "scheduleHorizonHours": 48,
            "locationAccuracyM": 50.0,
            "boundary": INDIA_BOUNDARY,
        },
        "pathLoss": {"model": "free-space", "txHeightM": 30.0, "rxHeightM": 5.0,
                     "minDistanceKm": 0.01},
        "towersCsv": towers_csv,
        "bind": "127.0.0.1:8054",
        "logFile": "paws-log.jsonl",
    }

def verify_india(rows):
    """100x100 sweep of the acceptance bbox: every in-boundary point must
    keep at least 12 of the 15 channels, and at least one point should sit
    exactly at 12 so the statistic is not vacuous."""
    lat_min, lon_min, lat_max, lon_max = INDIA_BBOX
    nlat = nlon = 100
    occupied_by_ch = {}
    for (_, la, lo, ch, erp, h) in rows:
        occupied_by_ch.setdefault(ch, []).append((la, lo, erp))
    min_count = 16
    n_in = 0
    hist = {}
    for i in range(nlat):
        lat = lat_min + (lat_max - lat_min) * i / (nlat - 1)
        for j in range(nlon):
            lon = lon_min + (lon_max - lon_min) * j / (nlon - 1)
            if not point_in_polygon((lat, lon), INDIA_BOUNDARY):
                continue
            n_in += 1
            blocked = 0
            for ch, txs in occupied_by_ch.items():
                f = channel_center_mhz(ch)
                for (la, lo, erp) in txs:
                    d = max(haversine_km((lat, lon), (la, lo)), 0.01)
                    if erp - fspl_db(d, f) > -114.0:
                        blocked += 1
                        break
            count = 15 - blocked
            hist[count] = hist.get(count, 0) + 1
            min_count = min(min_count, count)
    assert min_count >= 12, min_count
    print("  india grid: %d in-boundary points, min available %d, histogram %s"
          % (n_in, min_count, sorted(hist.items())))

def main():
    OUT.mkdir(exist_ok=True)
    rows = palghar_towers()
    verify_palghar(rows)
    write_csv(OUT / "palghar_towers.csv", rows)
    with open(OUT / "palghar_config.json", "w") as f:
        json.dump(palghar_config("palghar_towers.csv"), f, indent=2)
        f.write("\n")
    with open(OUT / "palghar_scenario.json", "w") as f:
        json.dump(palghar_scenario(), f, indent=2)
        f.write("\n")
    with open(OUT / "palghar_links.json", "w") as f:
        json.dump(palghar_links(), f, indent=2)
        f.write("\n")

    rows = india_towers()
    verify_india(rows)
    write_csv(OUT / "india_towers.csv", rows)
    with open(OUT / "india_config.json", "w") as f:
        json.dump(india_config("india_towers.csv"), f, indent=2)
        f.write("\n")
    print("fixtures written to", OUT)

if __name__ == "__main__":
    main()
