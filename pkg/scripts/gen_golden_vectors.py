#!/usr/bin/env python3
"""Regenerate golden/derive_eq2_vectors.json.

The helper app and the service must agree byte-for-byte on these cases;
both test suites consume the same file.
"""

import json
import os
import random

from epay import vpass

OUT = os.path.join(os.path.dirname(__file__), "..", "golden", "derive_eq2_vectors.json")


def main() -> None:
    rng = random.Random(20260101)
    cases = []
    for _ in range(100):
        z = rng.choice((6, 10, 10, 10, 12, 16))
        n = rng.randrange(2, 9)
        a = vpass.random_unit(z, rng)
        c = rng.randrange(z)
        x = vpass.random_digits(n, z, rng)
        y = vpass.random_digits(n, z, rng)
        k = vpass.derive_eq2(x, y, vpass.VirtualFunction(a=a, z=z), c)
        cases.append(
            {
                "z": z,
                "a": a,
                "c": c,
                "x": vpass.render_digits(x, z),
                "y": vpass.render_digits(y, z),
                "expected": vpass.render_digits(k, z),
            }
        )
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump(cases, fh, indent=1)
        fh.write("\n")
    print(f"wrote {len(cases)} cases to {os.path.normpath(OUT)}")


if __name__ == "__main__":
    main()
