"""Fused image-term kernel. Generated by tools/gen_image_kernel.py; do not edit."""

import math

from numba import njit


@njit(cache=True, error_model="numpy")
def image_point(e0, e1, e2, y3, n0, n1, n2, w, nu, C, cn, lam, mu, acc, s_img, di):
    """Accumulate ``w * N_img^T n`` into acc[0:3] and ``w * [(C grad N_img) n]^T`` into acc[12:21]."""
    x0 = e1*n1
    x1 = e0*x0
    x2 = e0**2
    x3 = e1**2
    x4 = e2**2
    x5 = x2 + x3 + x4
    x6 = math.sqrt(x5)
    x7 = 1/x6
    x8 = 6*y3
    x9 = x5**(-2)
    x10 = e2*x9
    x11 = x10*x8
    x12 = y3**2
    x13 = 6*x12
    x14 = x13*x9
    x15 = 4*nu
    x16 = x15 - 3
    x17 = 1/x5
    x18 = x16*x17
    x19 = e2 - x6
    x20 = x19**(-2)
    x21 = cn*x20
    x22 = x7*(x11 - x14 + x18 + x21)
    x23 = e0*n2
    x24 = e2*x14
    x25 = 1/x19
    x26 = cn*x25
    x27 = 3*x17
    x28 = x27*x4
    x29 = -x15
    x30 = x29 + 3
    x31 = x7*(e2*x16*x17 + 2*x17*y3*(x28 + x30) - x24 - x26)
    x32 = -x16
    x33 = x5**(-3/2)
    x34 = x32*x33
    x35 = x2*x27
    x36 = x35 - 1
    x37 = 2*x33
    x38 = x12*x37
    x39 = -x19
    x40 = cn/x39**2
    x41 = x40*x7
    x42 = e2*x33
    x43 = 2*y3
    x44 = x42*x43
    x45 = cn/x39
    x46 = x45 + x7
    x47 = e0*n0
    x48 = e1*n2
    x49 = x27*x3
    x50 = x49 - 1
    x51 = x17*x32
    x52 = x7*(e2*x51 + x17*x43*(x16 + x28) - x24 + x45)
    x53 = x28 - 1
    x54 = e2*x7
    x55 = 5*x17
    x56 = x2*x55
    x57 = x56 - 3
    x58 = x5**(-5/2)
    x59 = x13*x58
    x60 = x58*x8
    x61 = e2*x60
    x62 = 3*x2
    x63 = x58*x62
    x64 = x32*x63
    x65 = x2*x33
    x66 = x17*x2
    x67 = 2*cn
    x68 = x67/x39**3
    x69 = x40*x65 - x64 + x66*x68
    x70 = -x57*x59 + x57*x61 + x69
    x71 = x5**(-7/2)
    x72 = x12*x71
    x73 = 30*x72
    x74 = x3*x73
    x75 = x71*y3
    x76 = 30*e2*x75
    x77 = 3*x32
    x78 = x58*x77
    x79 = x3*x78
    x80 = x3*x33
    x81 = x17*x3
    x82 = x40*x80 + x68*x81 - x79
    x83 = x3*x76 - x74 + x82
    x84 = -x33
    x85 = -x61
    x86 = x4*x9
    x87 = e2*x17
    x88 = x54 - 1
    x89 = x40*x88 + x45*x87 + x51 - x77*x86
    x90 = 12*x12*x58
    x91 = x4*x73
    x92 = x4*x55
    x93 = x29 + x92 + 1
    x94 = 3*x34 - 4*x41 + x61*x93 + x7*x89 + x84 + x85 + x90 - x91
    x95 = lam*(x70 + x83 + x94)
    x96 = 2*x34 - 3*x41 + x84
    x97 = 2*n0
    x98 = e0*x97
    x99 = x56 - 1
    x100 = x16*x63
    x101 = x19**(-3)
    x102 = x101*x67
    x103 = x34 - x41 + x59 + x85
    x104 = x2*x73
    x105 = -x104 + x2*x76 + x69
    x106 = x103 + x105
    x107 = -x21*x7 + x84
    x108 = e1*(x100 - x102*x66 + x106 + x107 + x21*x65 - x59*x99 + x61*x99)
    x109 = 15*x9
    x110 = x109*x4
    x111 = x110*x2
    x112 = -x28
    x113 = x112 + 1
    x114 = x37*y3
    x115 = x112 + x16
    x116 = x33*x45
    x117 = x17*x40
    x118 = e2*x59
    x119 = e2*x100
    x120 = x21*x42
    x121 = x102*x7*x88
    x122 = -e2*x104
    x123 = x118 + x122
    x124 = x21*x88
    x125 = -x124
    x126 = x125 + x32*x42 - x42 - x45*x7
    x127 = -e2*x64 + x114*(x111 + x113 - x35) + x114*(x111 + x115 + x51*x62) + x116*x2 + x117*x2 - x118*x99 + x119 + x120*x2 - x121*x2 + x123 + x126
    x128 = x103 + x83
    x129 = 2*n1
    x130 = e0*x129
    x131 = 30*x4
    x132 = 3*x16
    x133 = x17*x21
    x134 = e2*x133
    x135 = -60*e2*x72 - e2*x78 + x116 + x117 + x131*x75 + x60*(x30 + x92) - x60 - x7*(2*cn*x101*x88 - x10*x132 - x134)
    x136 = e1*x135
    x137 = x136*x23
    x138 = 2*n2
    x139 = x138*x7*(x11*x93 - x12*x131/x5**3 + x14 + x89)
    x140 = x3*x55
    x141 = x140 - 3
    x142 = -x141*x59 + x141*x61 + x82
    x143 = lam*(x105 + x142 + x94)
    x144 = x140 - 1
    x145 = x132*x58
    x146 = x145*x3
    x147 = e0*(-x102*x81 + x107 + x128 - x144*x59 + x144*x61 + x146 + x21*x80)
    x148 = x110*x3
    x149 = 3*x3
    x150 = e2*x146
    x151 = -e2*x74
    x152 = x118 + x151
    x153 = -e2*x79 + x114*(x113 + x148 - x49) + x114*(x115 + x148 + x149*x51) + x116*x3 + x117*x3 - x118*x144 + x120*x3 - x121*x3 + x126 + x150 + x152
    x154 = x26*x7
    x155 = x16*x42
    x156 = x112 + x30
    x157 = x26*x33
    x158 = x114*(x111 + x156 + x18*x62) - x119 + x133*x2 - x157*x2
    x159 = x114*(x148 + x149*x18 + x156) + x133*x3 - x150 - x157*x3
    x160 = -e2**3*x145 + x114*(e2**4*x109 - 12*x17*x4 + 1) - x118*(x92 - 3) - x124*x54 + x124 + x157*x4 + x42
    x161 = lam*(e2*x90 + x122 + x151 + x154 + 4*x155 + x158 + x159 + x160)
    x162 = e1*(cn*x17*x20 - e2*x145 - e2*x73 - x157 + 6*x58*y3*(x16 + x92))
    x163 = x154 + x155
    x164 = x92 - 1
    x165 = cn*e2*x25*x33 + 6*e2*x164*x58*y3 - x107 + 6*x12*x58 - x134 - x145*x4 - x164*x59 - x61*(-x15 - x92 + 5) - x7*(x125 + x132*x86 - x18 + x26*x87) - x91
    x166 = n2*x165
    if s_img:
        acc[0] += w * (C*(-n0*(x2*x34 - x2*x41 + x36*x38 - x36*x44 + x46) + x1*x22 + x23*x31))
        acc[1] += w * (C*(e1*x22*x47 - n1*(x3*x34 - x3*x41 + x38*x50 - x44*x50 + x46) + x31*x48))
        acc[2] += w * (-C*(n2*(x34*x4 - x38*x53 + x44*x53 - x45*x54 + x46) + x0*x52 + x47*x52))
    if di:
        acc[12] += w * (-C*(mu*(n1*x108 + n2*x127 + x98*(x70 + x96)) + x47*x95))
        acc[13] += w * (-C*(e0*n1*x95 + mu*(n0*x108 + x128*x130 + x137)))
        acc[14] += w * (-C*(mu*(e0*x139 + n0*x127 + x1*x135) + x23*x95))
        acc[15] += w * (-C*(e1*n0*x143 + mu*(e1*x106*x97 + n1*x147 + x137)))
        acc[16] += w * (-C*(mu*(e1*x129*(x142 + x96) + n0*x147 + n2*x153) + x0*x143))
        acc[17] += w * (-C*(mu*(e1*x139 + n1*x153 + x136*x47) + x143*x48))
        acc[18] += w * (C*(mu*(e0*x166 + x130*x162 + x97*(x123 + x158 + x163)) + n0*x161))
        acc[19] += w * (C*(mu*(e1*x166 + x129*(x152 + x159 + x163) + x162*x98) + n1*x161))
        acc[20] += w * (C*(mu*(x0*x165 + x138*(-x154 + 2*x155 + x160) + x165*x47) + n2*x161))
