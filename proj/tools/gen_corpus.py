#!/usr/bin/env python3
"""Generates the example corpus: a four-IP gateway SoC plus small models.

The gateway datapaths compare two array multipliers with swapped operands.
Such commutativity miters are hard for SAT, unless the accumulator feeding
them is held by a disabled enable, in which case they fold to constants.
"""

import argparse
import os

OPERAND_BITS = 12


class Module:
    def __init__(self, name):
        self.name = name
        self.lines = [".module " + name]
        self.fresh = 0

    def add(self, line):
        self.lines.append(line)

    def wire(self, width=1, prefix="n"):
        self.fresh += 1
        name = "%s%d" % (prefix, self.fresh)
        self.add(".wire %s %d" % (name, width))
        return name

    def gate(self, kind, *ins, prefix="n"):
        out = self.wire(1, prefix)
        self.add(".gate %s %s %s" % (kind, out, " ".join(ins)))
        return out

    def text(self):
        return "\n".join(self.lines + [".endmodule"]) + "\n"


def full_adder(m, a, b, c, p):
    if c is None:
        return m.gate("XOR", a, b, prefix=p), m.gate("AND", a, b, prefix=p)
    t = m.gate("XOR", a, b, prefix=p)
    s = m.gate("XOR", t, c, prefix=p)
    co = m.gate("OR", m.gate("AND", a, b, prefix=p), m.gate("AND", t, c, prefix=p), prefix=p)
    return s, co


def multiplier(m, out, a, b, w, p):
    """out (2w bits) = a * b, array style; a and b are lists of bit refs."""
    acc = [m.gate("AND", a[j], b[0], prefix=p) for j in range(w)]
    product = [acc[0]]
    acc = acc[1:]
    for i in range(1, w):
        row = [m.gate("AND", a[j], b[i], prefix=p) for j in range(w)]
        carry = None
        nxt = []
        for j in range(w):
            x = acc[j] if j < len(acc) else None
            if x is None:
                if carry is None:
                    nxt.append(row[j])
                else:
                    s, carry = full_adder(m, row[j], carry, None, p)
                    nxt.append(s)
                continue
            s, carry = full_adder(m, row[j], x, carry, p)
            nxt.append(s)
        nxt.append(carry)
        product.append(nxt[0])
        acc = nxt[1:]
    product.extend(acc)
    for k, bit in enumerate(product[: 2 * w]):
        m.add(".gate OR %s[%d] %s %s" % (out, k, bit, bit))


def datapath(m, tag, enable, data, w=OPERAND_BITS):
    """acc<tag> loads `data` when `enable`; pa<tag>/pb<tag> multiply its halves both ways."""
    acc = "acc" + tag
    m.add(".reg %s %d" % (acc, 2 * w))
    m.add(".dff %s %s en=%s rst=rst rstval=0" % (acc, data, enable))
    lo = ["%s[%d]" % (acc, i) for i in range(w)]
    hi = ["%s[%d]" % (acc, w + i) for i in range(w)]
    for name in ("pa" + tag, "pb" + tag):
        m.add(".wire %s %d" % (name, 2 * w))
    multiplier(m, "pa" + tag, lo, hi, w, "ma%s_" % tag)
    multiplier(m, "pb" + tag, hi, lo, w, "mb%s_" % tag)


def sw_reg(m, name, width, reset):
    m.add(".reg %s %d sw" % (name, width))
    m.add(".dff %s %s rst=rst rstval=0x%x" % (name, name, reset))


def cpu():
    w = OPERAND_BITS
    m = Module("cpu")
    for port, width in (("rst", 1), ("ibus_ack", 1), ("ibus_dat", 2 * w), ("can_st", 7), ("eth_st", 7), ("rdat", 16)):
        m.add(".input %s %d" % (port, width))
    for port, width in (("ctl_can", 8), ("ctl_eth", 8), ("addr", 7), ("wdat", 16), ("we", 1)):
        m.add(".output %s %d" % (port, width))
    for name, width, reset in (("SR", 16, 0x8001), ("EPCR", 16, 0), ("EEAR", 16, 0), ("ESR", 16, 0), ("PICMR", 16, 0)):
        sw_reg(m, name, width, reset)
    m.add(".gate XOR ctl_can SR[7:0] PICMR[7:0]")
    m.add(".gate XOR ctl_eth SR[15:8] PICMR[15:8]")
    m.add(".gate AND addr EEAR[6:0] EPCR[6:0]")
    m.add(".gate OR wdat ESR rdat")
    m.add(".gate AND we SR[2] ibus_ack")
    datapath(m, "", "ibus_ack", "ibus_dat")
    return m.text()


def ram():
    m = Module("ram")
    for port, width in (("rst", 1), ("addr", 7), ("din", 16), ("we", 1)):
        m.add(".input %s %d" % (port, width))
    m.add(".output dout 16")
    m.add(".reg mem0 16")
    m.add(".reg mem1 16")
    m.add(".reg rdy 1 init=1")
    m.add(".wire sel0 1")
    m.add(".wire sel1 1")
    m.add(".wire naddr 1")
    m.add(".wire one 1")
    m.add(".gate NOT naddr addr[0]")
    m.add(".gate AND sel0 we naddr")
    m.add(".gate AND sel1 we addr[0]")
    m.add(".dff mem0 din en=sel0")
    m.add(".dff mem1 din en=sel1")
    m.add(".const one 1")
    m.add(".dff rdy one rst=rst rstval=1")
    m.add(".gate MUX dout addr[0] mem0 mem1")
    return m.text()


def can():
    w = OPERAND_BITS
    m = Module("can")
    for port, width in (("rst", 1), ("rxd", 1), ("ctl", 8), ("rx_data", 2 * w)):
        m.add(".input %s %d" % (port, width))
    m.add(".output status 7")
    m.add(".output tx_frame 5")
    m.add(".output prescale 3")
    for name, reset in (("MODE", 0x01), ("COMMAND", 0), ("CLKDIV", 0), ("BTR1", 0), ("BTR0", 0)):
        sw_reg(m, name, 8, reset)
    m.add(".wire run 1")
    m.add(".gate NOT run MODE[0]")
    m.add(".gate XOR status MODE[6:0] COMMAND[6:0]")
    m.add(".wire tq 5")
    m.add(".gate XOR tq CLKDIV[4:0] BTR1[4:0]")
    m.add(".gate AND tx_frame tq BTR0[4:0]")
    m.add(".gate NOT prescale CLKDIV[7:5]")
    datapath(m, "1", "run", "rx_data")
    datapath(m, "2", "COMMAND[0]", "rx_data")
    return m.text()


def ethmac():
    w = OPERAND_BITS
    m = Module("ethmac")
    for port, width in (("rst", 1), ("rx_dv", 1), ("ctl", 8), ("fwd", 5), ("rx_data", 2 * w)):
        m.add(".input %s %d" % (port, width))
    m.add(".output status 7")
    m.add(".output speed 3")
    for name, width, reset in (("MODER", 16, 0xA000), ("MIICOMMAND", 8, 0), ("CTRLMODER", 8, 0),
                               ("MIIMODER", 8, 0x64), ("PACKETLEN", 16, 0x0600)):
        sw_reg(m, name, width, reset)
    m.add(".wire frame 7")
    m.add(".gate XOR frame MODER[6:0] MIICOMMAND[6:0]")
    m.add(".wire len 7")
    m.add(".gate XOR len MIIMODER[6:0] PACKETLEN[6:0]")
    m.add(".wire mix 7")
    m.add(".gate AND mix frame CTRLMODER[6:0]")
    m.add(".gate OR status mix len")
    m.add(".gate NOT speed MODER[15:13]")
    datapath(m, "1", "MODER[0]", "rx_data")
    datapath(m, "2", "MIICOMMAND[1]", "rx_data")
    datapath(m, "3", "CTRLMODER[0]", "rx_data")
    datapath(m, "4", "rx_dv", "rx_data")
    return m.text()


GATEWAY_DSN = """\
# Gateway SoC: a CPU with RAM, a CAN controller and an Ethernet MAC.
.design gateway
.instance cpu cpu0
.instance ram ram0
.instance can can0
.instance ethmac eth0
.connect cpu0.ctl_can can0.ctl
.connect can0.status cpu0.can_st
.connect cpu0.ctl_eth eth0.ctl
.connect eth0.status cpu0.eth_st
.connect can0.tx_frame eth0.fwd
.connect cpu0.addr ram0.addr
.connect cpu0.wdat ram0.din
.connect cpu0.we ram0.we
.connect ram0.dout cpu0.rdat
"""

GATEWAY_MAP = """\
# address  register
0x100 cpu0.SR
0x104 cpu0.EPCR
0x108 cpu0.EEAR
0x10c cpu0.ESR
0x110 cpu0.PICMR
0x200 can0.MODE
0x204 can0.COMMAND
0x208 can0.CLKDIV
0x20c can0.BTR1
0x210 can0.BTR0
0x300 eth0.MODER
0x304 eth0.MIICOMMAND
0x308 eth0.CTRLMODER
0x30c eth0.MIIMODER
0x310 eth0.PACKETLEN
"""

BOOT_ESW = """\
# Boot sequence: CPU setup, CAN configuration, Ethernet configuration.
reset 2
write 0x100 0x8001
write 0x104 0x0
write 0x108 0x40
write 0x10c 0x0
write 0x110 0xff
wait 2
# CAN: reset mode first, command bit 0 stays clear
write 0x200 0x01
write 0x204 0x02
write 0x208 0x05
write 0x20c 0x1c
write 0x210 0x03
read 0x200
# Ethernet: programmed with its datapaths disabled
write 0x300 0xa000
write 0x304 0x00
write 0x308 0x00
write 0x30c 0x64
write 0x310 0x0600
read 0x300
# leave CAN reset mode
write 0x200 0x00
wait 4
"""

USER_PROP = """\
# IP properties
prop cpu_dp : cpu0.pa == cpu0.pb
prop ram_rdy : ram0.rdy
prop ram_rdy_known : ram0.rdy == 1
prop can_dp1 : can0.pa1 == can0.pb1
prop can_dp2 : can0.pa2 == can0.pb2
prop eth_dp1 : eth0.pa1 == eth0.pb1
prop eth_dp2 : eth0.pa2 == eth0.pb2
prop eth_dp3 : eth0.pa3 == eth0.pb3
# subsystem properties
prop sub_cpu : ram0.rdy -> (cpu0.pa == cpu0.pb)
prop sub_can1 : ram0.rdy -> (can0.pa1 == can0.pb1)
prop sub_can2 : ram0.rdy -> (can0.pa2 == can0.pb2)
prop sub_eth1 : ram0.rdy -> (eth0.pa1 == eth0.pb1)
prop sub_eth4 : can0.rxd -> (eth0.pa4 == eth0.pb4)
"""


def timer():
    m = Module("timer")
    m.add(".input rst 1")
    m.add(".input load 16")
    m.add(".output expired 1")
    sw_reg(m, "CTRL", 8, 0)
    sw_reg(m, "PERIOD", 8, 0)
    m.add(".gate AND expired CTRL[1] PERIOD[0]")
    datapath(m, "", "CTRL[0]", "load", w=8)
    return m.text()


TIMER_MAP = """\
0x0 timer.CTRL
0x4 timer.PERIOD
"""

TIMER_PROP = """\
prop timer_dp : timer.pa == timer.pb
"""

COUNTER_NET = """\
# Free-running 2-bit counter from a known power-up value.
.module counter
.output count 2
.reg count 2 init=0
.wire inc 2
.gate NOT inc[0] count[0]
.gate XOR inc[1] count[1] count[0]
.dff count inc
.endmodule
"""

COUNTER_PROP = """\
prop never3 : counter.count != 3
prop below4 : counter.count < 4
"""


def tworeg():
    m = Module("tworeg")
    m.add(".input rst 1")
    m.add(".output o1 1")
    m.add(".output o2 3")
    sw_reg(m, "R1", 1, 0)
    sw_reg(m, "R2", 1, 0)

    def chain(src, length, dst):
        cur = src
        for _ in range(length - 1):
            cur = m.gate("NOT", cur, prefix="c")
        m.add(".gate NOT %s %s" % (dst, cur))

    chain("R1", 9, "o1")
    chain("R2", 4, "o2[0]")
    chain("R2", 4, "o2[1]")
    chain("R2", 5, "o2[2]")
    return m.text()


TWOREG_MAP = """\
0x0 tworeg.R1
0x4 tworeg.R2
"""


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "corpus"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    files = {
        "cpu.net": cpu(),
        "ram.net": ram(),
        "can.net": can(),
        "ethmac.net": ethmac(),
        "gateway.dsn": GATEWAY_DSN,
        "gateway.map": GATEWAY_MAP,
        "boot.esw": BOOT_ESW,
        "user.prop": USER_PROP,
    }
    small = {
        "timer.net": timer(),
        "timer.map": TIMER_MAP,
        "timer.prop": TIMER_PROP,
        "counter.net": COUNTER_NET,
        "counter.prop": COUNTER_PROP,
        "tworeg.net": tworeg(),
        "tworeg.map": TWOREG_MAP,
    }
    for name, text in files.items():
        with open(os.path.join(args.out, name), "w") as f:
            f.write(text)
    # Standalone models live apart so the gateway library stays closed.
    small_dir = os.path.join(args.out, "small")
    os.makedirs(small_dir, exist_ok=True)
    for name, text in small.items():
        with open(os.path.join(small_dir, name), "w") as f:
            f.write(text)


if __name__ == "__main__":
    main()
