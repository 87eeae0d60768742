"""Writes starlink_shell.3le: a synthetic 3LE set shaped like one Starlink
shell (550 km, 53 deg), 8 adjacent planes x 20 satellites.

Usage: python3 make_fixture.py > starlink_shell.3le
"""
import math
import random

MU = 398600.4418
RE = 6378.137
PLANES, PER_PLANE = 8, 20
ALT_KM, INC_DEG, RAAN_STEP = 550.0, 53.0, 5.0

def checksum(body):
    return sum(int(c) if c.isdigit() else (1 if c == '-' else 0) for c in body) % 10

def line(body):
    assert len(body) == 68, (len(body), body)
    return body + str(checksum(body))

rng = random.Random(20240529)
a = RE + ALT_KM
n_rev_day = math.sqrt(MU / a**3) * 86400 / (2 * math.pi)
out = []
for p in range(PLANES):
    for s in range(PER_PLANE):
        cat = 90001 + p * PER_PLANE + s
        name = f"STARLINK-SHELL1-P{p+1:02d}-S{s+1:02d}"
        day = 150.25 + rng.uniform(0.0, 0.3)
        mm = n_rev_day + rng.uniform(-2e-4, 2e-4)
        ecc = rng.randint(800, 1800)
        argp = rng.uniform(60.0, 120.0)
        # phase is laid out at day 150.55 and carried back to each epoch
        ma = (360.0 / PER_PLANE * s + 1.5 * p - argp + 360.0 * mm * (day - 150.55)) % 360.0
        raan = (RAAN_STEP * p) % 360.0
        l1 = f"1 {cat:05d}U 24065{chr(65 + s % 26)}   24{day:012.8f}  .00001234  00000-0  10000-3 0  999"
        l2 = f"2 {cat:05d} {INC_DEG:8.4f} {raan:8.4f} {ecc:07d} {argp:8.4f} {ma:8.4f} {mm:11.8f}{1000 + s:5d}"
        out += [name, line(l1), line(l2)]
print("\n".join(out))
