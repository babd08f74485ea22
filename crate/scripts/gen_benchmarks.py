#!/usr/bin/env python3
"""Writes the bundled BLIF benchmark circuits into benchmarks/."""

import argparse
import itertools
from pathlib import Path


class Blif:
    def __init__(self, name):
        self.name = name
        self.inputs = []
        self.outputs = []
        self.latches = []
        self.blocks = []
        self.count = itertools.count()

    def inp(self, name):
        self.inputs.append(name)
        return name

    def out(self, signal, name=None):
        if name is None or name == signal:
            self.outputs.append(signal)
            return signal
        self.blocks.append(([signal], name, ["1 1"]))
        self.outputs.append(name)
        return name

    def wire(self):
        return f"n{next(self.count)}"

    def names(self, ins, rows, name=None):
        o = name or self.wire()
        self.blocks.append((list(ins), o, rows))
        return o

    def and_(self, *xs, name=None):
        return self.names(xs, ["1" * len(xs) + " 1"], name)

    def or_(self, *xs, name=None):
        rows = ["-" * i + "1" + "-" * (len(xs) - i - 1) + " 1" for i in range(len(xs))]
        return self.names(xs, rows, name)

    def nand(self, *xs, name=None):
        return self.names(xs, ["1" * len(xs) + " 0"], name)

    def nor(self, *xs, name=None):
        return self.names(xs, ["0" * len(xs) + " 1"], name)

    def xor(self, a, b, name=None):
        return self.names([a, b], ["01 1", "10 1"], name)

    def xnor(self, a, b, name=None):
        return self.names([a, b], ["00 1", "11 1"], name)

    def not_(self, a, name=None):
        return self.names([a], ["0 1"], name)

    def mux(self, s, a, b):
        """s ? b : a"""
        return self.or_(self.and_(self.not_(s), a), self.and_(s, b))

    def text(self):
        lines = [f".model {self.name}", ".inputs " + " ".join(self.inputs), ".outputs " + " ".join(self.outputs)]
        for d, q in self.latches:
            lines.append(f".latch {d} {q} 0")
        for ins, o, rows in self.blocks:
            lines.append(".names " + " ".join(ins + [o]))
            lines.extend(rows)
        lines.append(".end")
        return "\n".join(lines) + "\n"


def full_adder(b, a, c, cin):
    t = b.xor(a, c)
    s = b.xor(t, cin)
    cout = b.or_(b.and_(a, c), b.and_(t, cin))
    return s, cout


def c17():
    b = Blif("c17")
    g1, g2, g3, g6, g7 = (b.inp(f"G{i}") for i in (1, 2, 3, 6, 7))
    g10 = b.nand(g1, g3, name="G10")
    g11 = b.nand(g3, g6, name="G11")
    g16 = b.nand(g2, g11, name="G16")
    g19 = b.nand(g11, g7, name="G19")
    b.out(b.nand(g10, g16, name="G22"))
    b.out(b.nand(g16, g19, name="G23"))
    return b


def s27():
    b = Blif("s27")
    g0, g1, g2, g3 = (b.inp(f"G{i}") for i in range(4))
    b.latches = [("G10", "G5"), ("G11", "G6"), ("G13", "G7")]
    g14 = b.not_(g0, name="G14")
    g8 = b.and_(g14, "G6", name="G8")
    g12 = b.nor(g1, "G7", name="G12")
    g15 = b.or_(g12, g8, name="G15")
    g16 = b.or_(g3, g8, name="G16")
    g9 = b.nand(g16, g15, name="G9")
    g11 = b.nor("G5", g9, name="G11")
    b.nor(g14, g11, name="G10")
    b.nor(g2, g12, name="G13")
    b.out(b.not_(g11, name="G17"))
    return b


def adder(width):
    b = Blif(f"rca{width}")
    xs = [b.inp(f"a{i}") for i in range(width)]
    ys = [b.inp(f"b{i}") for i in range(width)]
    c = b.inp("cin")
    for i in range(width):
        s, c = full_adder(b, xs[i], ys[i], c)
        b.out(s, f"s{i}")
    b.out(c, "cout")
    return b


def multiplier(width):
    b = Blif(f"mult{width}")
    xs = [b.inp(f"a{i}") for i in range(width)]
    ys = [b.inp(f"b{i}") for i in range(width)]
    # Carry-save array of partial products.
    row = [b.and_(xs[j], ys[0]) for j in range(width)]
    outs = [row[0]]
    acc = row[1:]
    for i in range(1, width):
        pp = [b.and_(xs[j], ys[i]) for j in range(width)]
        nxt = []
        carry = None
        for j in range(width):
            top = acc[j] if j < len(acc) else None
            if top is None and carry is None:
                nxt.append(pp[j])
            elif top is None:
                s = b.xor(pp[j], carry)
                carry = b.and_(pp[j], carry)
                nxt.append(s)
            elif carry is None:
                s = b.xor(pp[j], top)
                carry = b.and_(pp[j], top)
                nxt.append(s)
            else:
                s, carry = full_adder(b, pp[j], top, carry)
                nxt.append(s)
        nxt.append(carry)
        outs.append(nxt[0])
        acc = nxt[1:]
    outs.extend(acc)
    for k, s in enumerate(outs):
        b.out(s, f"p{k}")
    return b


def comparator(width):
    b = Blif(f"cmp{width}")
    xs = [b.inp(f"a{i}") for i in range(width)]
    ys = [b.inp(f"b{i}") for i in range(width)]
    eq = None
    gt = None
    for i in reversed(range(width)):
        e = b.xnor(xs[i], ys[i])
        g = b.and_(xs[i], b.not_(ys[i]))
        if eq is None:
            eq, gt = e, g
        else:
            gt = b.or_(gt, b.and_(eq, g))
            eq = b.and_(eq, e)
    b.out(eq, "eq")
    b.out(gt, "gt")
    b.out(b.nor(eq, gt), "lt")
    return b


def alu(width, name=None):
    b = Blif(name or f"alu{width}")
    xs = [b.inp(f"a{i}") for i in range(width)]
    ys = [b.inp(f"b{i}") for i in range(width)]
    op0, op1 = b.inp("op0"), b.inp("op1")
    c = b.inp("cin")
    zero = None
    for i in range(width):
        s, c = full_adder(b, xs[i], ys[i], c)
        land = b.and_(xs[i], ys[i])
        lor = b.or_(xs[i], ys[i])
        lxor = b.xor(xs[i], ys[i])
        r = b.mux(op1, b.mux(op0, s, land), b.mux(op0, lor, lxor))
        b.out(r, f"r{i}")
        z = b.not_(r)
        zero = z if zero is None else b.and_(zero, z)
    b.out(c, "cout")
    b.out(zero, "zero")
    return b


def parity(width):
    b = Blif(f"parity{width}")
    layer = [b.inp(f"x{i}") for i in range(width)]
    while len(layer) > 1:
        nxt = [b.xor(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    b.out(layer[0], "p")
    return b


def mux(sel_bits):
    b = Blif(f"mux{1 << sel_bits}")
    data = [b.inp(f"d{i}") for i in range(1 << sel_bits)]
    sel = [b.inp(f"s{i}") for i in range(sel_bits)]
    layer = data
    for s in sel:
        layer = [b.mux(s, layer[i], layer[i + 1]) for i in range(0, len(layer), 2)]
    b.out(layer[0], "y")
    return b


def priority_encoder(width):
    b = Blif(f"prienc{width}")
    req = [b.inp(f"r{i}") for i in range(width)]
    bits = (width - 1).bit_length()
    # grant[i] = r[i] and no higher request.
    higher = None
    grants = [None] * width
    for i in reversed(range(width)):
        grants[i] = req[i] if higher is None else b.and_(req[i], b.not_(higher))
        higher = req[i] if higher is None else b.or_(higher, req[i])
    for k in range(bits):
        terms = [grants[i] for i in range(width) if i >> k & 1]
        b.out(b.or_(*terms) if len(terms) > 1 else terms[0], f"y{k}")
    b.out(higher, "valid")
    return b


def interrupt_controller(channels, name):
    """Priority interrupt controller in the style of c432: masked requests
    across three buses, bus arbitration and encoded channel number."""
    b = Blif(name)
    buses = []
    for bus in "abc":
        reqs = [b.inp(f"{bus}{i}") for i in range(channels)]
        buses.append(reqs)
    en = [b.inp(f"e{i}") for i in range(channels)]
    masked = [[b.nand(r, en[i]) for i, r in enumerate(reqs)] for reqs in buses]
    active = [b.not_(b.and_(*m)) for m in masked]
    b.out(active[0], "pa")
    b.out(b.and_(b.not_(active[0]), active[1]), "pb")
    b.out(b.and_(b.not_(active[0]), b.not_(active[1]), active[2]), "pc")
    chosen = []
    for i in range(channels):
        sel_a = b.not_(masked[0][i])
        sel_b = b.and_(b.not_(active[0]), b.not_(masked[1][i]))
        sel_c = b.and_(b.not_(active[0]), b.not_(active[1]), b.not_(masked[2][i]))
        chosen.append(b.or_(sel_a, sel_b, sel_c))
    higher = None
    grants = []
    for i in range(channels):
        g = chosen[i] if higher is None else b.and_(chosen[i], b.not_(higher))
        higher = chosen[i] if higher is None else b.or_(higher, chosen[i])
        grants.append(g)
    for k in range((channels - 1).bit_length()):
        terms = [grants[i] for i in range(channels) if i >> k & 1]
        b.out(b.or_(*terms) if len(terms) > 1 else terms[0], f"chan{k}")
    return b


def alu_with_flags(width, name):
    """Datapath in the style of c880: ALU plus comparator, parity and a
    shifter stage."""
    b = Blif(name)
    xs = [b.inp(f"a{i}") for i in range(width)]
    ys = [b.inp(f"b{i}") for i in range(width)]
    op = [b.inp(f"op{i}") for i in range(3)]
    c = b.inp("cin")
    res = []
    for i in range(width):
        s, c = full_adder(b, xs[i], ys[i], c)
        land = b.and_(xs[i], ys[i])
        lor = b.or_(xs[i], ys[i])
        lxor = b.xor(xs[i], ys[i])
        shl = xs[i - 1] if i > 0 else b.and_(xs[0], b.not_(xs[0]))
        shr = xs[i + 1] if i + 1 < width else xs[i]
        lo = b.mux(op[0], s, land)
        hi = b.mux(op[0], lor, lxor)
        sh = b.mux(op[0], shl, shr)
        r = b.mux(op[2], b.mux(op[1], lo, hi), sh)
        res.append(r)
        b.out(r, f"r{i}")
    b.out(c, "cout")
    eq = None
    gt = None
    for i in reversed(range(width)):
        e = b.xnor(xs[i], ys[i])
        g = b.and_(xs[i], b.not_(ys[i]))
        if eq is None:
            eq, gt = e, g
        else:
            gt = b.or_(gt, b.and_(eq, g))
            eq = b.and_(eq, e)
    b.out(eq, "eq")
    b.out(gt, "gt")
    p = res[0]
    for r in res[1:]:
        p = b.xor(p, r)
    b.out(p, "par")
    z = b.nor(*res[: width // 2])
    z2 = b.nor(*res[width // 2 :])
    b.out(b.and_(z, z2), "zero")
    return b


CIRCUITS = [
    c17,
    s27,
    lambda: adder(8),
    lambda: adder(16),
    lambda: multiplier(4),
    lambda: multiplier(8),
    lambda: comparator(8),
    lambda: alu(4),
    lambda: parity(16),
    lambda: mux(3),
    lambda: priority_encoder(8),
    lambda: interrupt_controller(9, "c432s"),
    lambda: alu_with_flags(10, "c880s"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "benchmarks")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for make in CIRCUITS:
        b = make()
        (args.out / f"{b.name}.blif").write_text(b.text())
        print(f"{b.name}: {len(b.blocks)} blocks, {len(b.inputs)} inputs, {len(b.outputs)} outputs")


if __name__ == "__main__":
    main()
