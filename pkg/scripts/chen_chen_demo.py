"""Two-center example end to end: projection, product, atlas, singularity, blow-up check."""
import itertools
import json

import numpy as np

from ghlab.config import chen_chen
from ghlab.directions import make_frame, project
from ghlab.entire import build_product, eval_product
from ghlab.surface import (
    CHEN_CHEN_CHARTS,
    blowup_fixture_check,
    build_atlas,
    chart_name,
    cocycle_check,
    pole_order,
    singular_points,
    transition,
)


def main():
    cfg = chen_chen()
    for v in ([1, 0, 0], [0, 0, 1]):
        rep = project(cfg, make_frame(v))
        print(f"v = {v}: clusters {[(c.b, c.m) for c in rep.clusters]}, generic={rep.generic}")

    P = build_product(project(cfg, make_frame([1, 0, 0])))
    print("P(2) =", eval_product(P, 2.0)[0], " delta =", P.delta)

    atlas = build_atlas(P)
    names = {chart_name(a): k for k, a in CHEN_CHEN_CHARTS.items()}
    print("charts:", [names[chart_name(a)] for a in atlas.charts])
    for a, b in itertools.combinations(atlas.charts, 2):
        f = transition(atlas, a, b, 2.0)
        print(f"  f_{names[chart_name(a)]},{names[chart_name(b)]}(2) = {f.real:g}, "
              f"order at 0: {pole_order(atlas, a, b, 0)}")
    u = np.linspace(0.5, 3.0, 6) + 0.3j
    m1, m2, m3 = atlas.charts
    print("cocycle residual:", float(np.max(cocycle_check(atlas, m1, m2, m3, u))))

    print(json.dumps(singular_points(P).to_dict()["singular"], indent=2))
    rep = blowup_fixture_check()
    print(json.dumps(rep.to_dict(), indent=2))


if __name__ == "__main__":
    main()
