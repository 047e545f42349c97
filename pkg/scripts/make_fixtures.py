"""Write the worked-example fixtures (tensors and varieties) as JSON package data."""

import itertools
import re
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from xdecomp.io import save_json, tensor_to_json, variety_to_json  # noqa: E402
from xdecomp.poly import Poly  # noqa: E402
from xdecomp.tensor import SymTensor, from_poly  # noqa: E402
from xdecomp.variety import VarietySpec  # noqa: E402

OUT = ROOT / "src" / "xdecomp" / "data"


def form(nvars, terms):
    """terms: {exponent string like '0110': coeff} over x_0..x_n."""
    return Poly(nvars, {tuple(int(c) for c in k): v for k, v in terms.items()})


def labeled(d, text):
    """Parse 'A3000=2, A2100=1, ...' style listings."""
    entries = {}
    for lab, val in re.findall(r"A(\d+)\s*=\s*(-?\d+)", text):
        entries[tuple(int(c) for c in lab)] = int(val)
    return SymTensor.from_homogeneous(d, entries)


def write(name, A, X):
    save_json(tensor_to_json(A), OUT / f"{name}.tensor.json")
    save_json(variety_to_json(X), OUT / f"{name}.variety.json")


def example_generating_matrix():
    # A(1, y) in y_1, y_2, y_3
    c = {
        (0, 0, 3): 32, (0, 1, 2): -12, (1, 0, 2): 126, (0, 2, 1): -48, (1, 1, 1): 36,
        (2, 0, 1): 150, (0, 3, 0): -20, (1, 2, 0): -18, (2, 1, 0): 42, (3, 0, 0): 51,
        (0, 0, 2): 18, (0, 1, 1): -36, (1, 0, 1): 84, (0, 2, 0): -30, (1, 1, 0): 12,
        (2, 0, 0): 45, (0, 0, 1): 6, (0, 1, 0): -6, (1, 0, 0): 9, (0, 0, 0): -1,
    }
    A = from_poly(Poly(3, c).homogenize(3), 3)
    X = VarietySpec(3, (form(4, {"1001": 1, "0110": -1}),), dimX=3, name="Segre P1 x P1")
    write("segre_small", A, X)


def membership_examples():
    full = np.zeros((4, 4, 4))
    for i, j, k in itertools.product(range(4), repeat=3):
        full[i, j, k] = i + j + k
    X = VarietySpec(3, (form(4, {"0020": 1, "0200": -1, "2000": -1}),
                        form(4, {"0002": 1, "0020": -1, "0200": -1})), name="two quadrics")
    write("membership_cubic", SymTensor.from_full(full), X)

    full = np.zeros((3,) * 4)
    for ii in itertools.product(range(3), repeat=4):
        full[ii] = sum(ii) ** 2 - sum(i * i for i in ii)
    X = VarietySpec(2, (form(3, {"110": 1, "011": 1, "101": 1}),
                        form(3, {"210": 1, "021": 1, "102": 1})), name="conic and cubic")
    write("membership_quartic", SymTensor.from_full(full), X)


def curve_examples():
    A = labeled(3, "A300=15, A210=81, A201=-6, A120=621, A111=-108, A102=66, "
                   "A030=5541, A021=-1296, A012=540, A003=-102")
    X = VarietySpec(2, (form(3, {"002": 1, "110": -1, "200": 1}),), dimX=2, name="parabola")
    write("parabola", A, X)

    A = labeled(3, "A300=3, A210=24, A201=72, A120=144, A111=456, A102=1224, "
                   "A030=1080, A021=3288, A012=9432, A003=28512")
    X = VarietySpec(2, (form(3, {"030": 1, "120": 1, "102": -1}),), dimX=2, name="nodal cubic")
    write("nodal", A, X)


def surface_examples():
    A = labeled(3, "A3000=2, A2100=1, A2010=5, A2001=-3, A1200=5, A1110=10, A1020=9, "
                   "A1101=2, A1011=7, A1002=5, A0300=-5, A0210=2, A0120=8, A0030=29, "
                   "A0201=-6, A0111=6, A0021=7, A0102=4, A0012=5, A0003=-9")
    X = VarietySpec(3, (form(4, {"0101": 1, "1001": -1, "0110": -1, "1010": 1}),), dimX=3,
                    name="two planes")
    write("two_planes", A, X)

    A = labeled(3, "A3000=5, A2100=-1, A2010=6, A2001=-13, A1200=9, A1110=8, A1020=6, "
                   "A1101=-33, A1011=-16, A1002=87, A0300=17, A0210=24, A0120=10, A0030=12, "
                   "A0201=-91, A0111=-54, A0021=-38, A0102=233, A0012=174, A0003=-739")
    # A0012 as listed (5) disagrees with the displayed decomposition; 174 restores both
    X = VarietySpec(3, (form(4, {"0120": -3, "0300": 1, "2001": -1}),), dimX=3, name="monkey saddle")
    write("monkey_saddle", A, X)


def larger_examples():
    # A10200 = -223 (listed as -233, which puts A off the curve)
    vals = [-7, -2, 87, 25, 20, 26, 334, -223, 60, -45, -9, 130, -144, -74, 182, 406, 1754, 1150,
            13647, 300, 156, 2353, 24, 421, 85, 830, 610, 6500, 60, 1050, 150, 550, 3630, 880, -250]
    A = SymTensor.from_list(4, 3, vals)
    X = VarietySpec(4, (
        form(5, {"01010": 1, "10100": -1, "11000": -1, "10010": 1}),
        form(5, {"00020": 1, "11000": -1, "20000": -1}),
        form(5, {"01001": 1, "01010": 4, "01100": -1, "02000": -1, "11000": 5}),
    ), name="space curve in P^4")
    write("curve_p4", A, X)

    vals = [22, 38, 89, 6, 34, 220, 490, 79, 119, 65, 32, 165, 71, 89, 6, 2216, 3044, 686, 653, 1029,
            490, 239, 195, 173, 48, 1111, 574, 257, 490, 79, 65, 25, 317, 71, 100, 21424, 20440,
            6028, 4570, 1615, 8033, 3788, 1918, 929, 1553, 1162, 415, 455, 233, 116, 8187, 4316, 1954,
            1007, 3044, 686, 653, 490, 239, 173, 663, 1882, 271, 574, 257, 79, 621, 335, 317, -54]
    A = SymTensor.from_list(4, 4, vals)
    X = VarietySpec(4, (form(5, {"00020": 1, "00002": 1, "11000": -1}),
                        form(5, {"00011": 1, "10100": -1})), dimX=3, name="surface in P^4")
    write("surface_p4", A, X)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    example_generating_matrix()
    membership_examples()
    curve_examples()
    surface_examples()
    larger_examples()
    print("wrote", sorted(p.name for p in OUT.glob("*.json")))
