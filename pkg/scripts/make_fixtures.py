"""Regenerate the bundled workflow fixtures from their boolean definitions."""

import json
from pathlib import Path

from provlock.model import make_module, workflow_to_spec, Workflow

OUT = Path(__file__).resolve().parents[1] / "src" / "provlock" / "data" / "fixtures"
B = (0, 1)


def boolean(names, cost=1):
    return {a: B for a in names}, {a: cost for a in names}


def save(fid, names, modules):
    domains, costs = boolean(names)
    w = Workflow(domains, costs, tuple(make_module(*m, domains) for m in modules))
    (OUT / f"{fid}.json").write_text(json.dumps(workflow_to_spec(w), indent=1) + "\n")


def attrs(*idx):
    return [f"a{i}" for i in idx]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    save("fig1-m1", attrs(*range(1, 8)), [
        ("m1", "private", attrs(1, 2), attrs(3, 4, 5),
         lambda a1, a2: (a1 | a2, 1 - (a1 & a2), 1 - (a1 ^ a2))),
        ("m2", "private", attrs(3, 4), attrs(6), lambda a3, a4: 1 - (a3 & a4)),
        ("m3", "private", attrs(4, 5), attrs(7), lambda a4, a5: 1 - (a4 & a5)),
    ])
    save("fig3-r1", attrs(1, 2, 3, 4), [
        ("r1", "public", attrs(1, 2), attrs(3, 4), lambda a1, a2: (a1, a2)),
    ])
    save("fig3-r2", attrs(1, 2, 3, 4), [
        ("r2", "public", attrs(1, 2), attrs(3, 4), lambda a1, a2: (1 - a1, a1)),
    ])
    save("wb-chain", attrs(*range(1, 7)), [
        ("m1", "private", attrs(1, 2), attrs(3, 4), lambda a1, a2: (a1, a2)),
        ("m2", "public", attrs(3, 4), attrs(5), lambda a3, a4: a3 | a4),
        ("m3", "private", attrs(5), attrs(6), lambda a5: a5),
    ])
    save("wa-nopred", attrs(*range(1, 7)), [
        ("m1", "private", attrs(1), attrs(3), lambda a1: a1),
        ("m2", "public", attrs(2), attrs(4), lambda a2: a2),
        ("m3", "public", attrs(3, 4), attrs(5), lambda a3, a4: a3 | a4),
        ("m4", "private", attrs(5), attrs(6), lambda a5: a5),
    ])
    save("app-multipred", attrs(*range(0, 7)), [
        ("m0", "private", attrs(0), attrs(2), lambda a0: a0),
        ("m1", "private", attrs(1), attrs(3), lambda a1: a1),
        ("m2", "public", attrs(2), attrs(4), lambda a2: a2),
        ("m3", "public", attrs(3, 4), attrs(5), lambda a3, a4: a3 | a4),
        ("m4", "private", attrs(5), attrs(6), lambda a5: a5),
    ])
    save("app-datashare", attrs(*range(1, 8)), [
        ("m1", "private", attrs(1, 2), attrs(3, 4), lambda a1, a2: (a1, a2)),
        ("m2", "public", attrs(3, 4), attrs(5), lambda a3, a4: a3 | a4),
        ("m3", "private", attrs(5), attrs(6), lambda a5: a5),
        ("m4", "private", attrs(3), attrs(7), lambda a3: a3),
    ])
    save("fig2-singlepred", attrs(*range(0, 20)), [
        ("m1", "public", attrs(0), attrs(1), lambda a0: 1 - a0),
        ("m2", "private", attrs(1), attrs(2, 3, 4, 5), lambda a1: (a1, 1 - a1, a1, a1)),
        ("m3", "public", attrs(2), attrs(6, 7), lambda a2: (a2, 1 - a2)),
        ("m4", "public", attrs(3), attrs(8, 13), lambda a3: (a3, a3)),
        ("m5", "public", attrs(4), attrs(9), lambda a4: 1 - a4),
        ("m6", "public", attrs(6), attrs(10), lambda a6: a6),
        ("m7", "public", attrs(7, 8), attrs(11, 12), lambda a7, a8: (a7 & a8, a7 | a8)),
        ("m8", "public", attrs(9), attrs(14), lambda a9: a9),
        ("m9", "private", attrs(10, 11), attrs(15), lambda a10, a11: a10 ^ a11),
        ("m10", "private", attrs(12), attrs(16), lambda a12: a12),
        ("m11", "private", attrs(5, 14, 16), attrs(17), lambda a5, a14, a16: a5 & (a14 | a16)),
        ("m12", "private", attrs(13), attrs(18), lambda a13: 1 - a13),
        ("m13", "public", attrs(15), attrs(19), lambda a15: a15),
    ])


if __name__ == "__main__":
    main()
