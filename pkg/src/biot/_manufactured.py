"""Closed-form manufactured solution data. Generated by scripts/gen_manufactured.py; do not edit."""

from numpy import cos, pi, sin


def displacement(x, y, t):
    x0 = pi*t
    x1 = x0*y
    x2 = x*x0
    x3 = x*y*(x - 1)**2*(y - 1)
    return (-x3*sin(x2)*cos(x1), -x3*sin(x1)*cos(x2))


def displacement_grad(x, y, t):
    x0 = pi*t
    x1 = x*x0
    x2 = sin(x1)
    x3 = 2*x
    x4 = x - 1
    x5 = cos(x1)
    x6 = x4*x5
    x7 = x0*y
    x8 = cos(x7)
    x9 = x8*y
    x10 = y - 1
    x11 = x10*x4
    x12 = sin(x7)
    x13 = x*x4**2
    x14 = x12*y
    return (-x11*x9*(x1*x6 + x2*x3 + x2*x4), x13*x2*(pi*t*x10*x12*y - x10*x8 - x9), x11*x14*(pi*t*x*x2*x4 - x3*x5 - x6), -x13*x5*(x0*x10*x9 + x10*x12 + x14))


def pressure(x, y, t):
    return (-x*y*(x - 1)**2*(y - 1)*cos(t + x - y),)


def pressure_grad(x, y, t):
    x0 = x - 1
    x1 = t + x - y
    x2 = cos(x1)
    x3 = sin(x1)
    x4 = y - 1
    x5 = x4*y
    return (x0*x5*(x*x0*x3 - 2*x*x2 - x0*x2), -x*x0**2*(x2*x4 + x2*y + x3*x5))


def total_pressure(x, y, t, lam, mu, alpha, c0, kp):
    x0 = x - 1
    x1 = y - 1
    x2 = x0*y
    x3 = x*x2
    x4 = pi*t
    x5 = x*x4
    x6 = cos(x5)
    x7 = x4*y
    x8 = x6*sin(x7)
    x9 = x*x1
    x10 = cos(x7)
    x11 = x10*sin(x5)
    x12 = x1*x2
    return (x0*(-alpha*x1*x3*cos(t + x - y) + lam*(x0*x8*x9 + 2*x10*x12*x5*x6 + x11*x12 + 2*x11*x9*y + x3*x8)),)


def body_force(x, y, t, lam, mu, alpha, c0, kp):
    x0 = x - 1
    x1 = x0**2
    x2 = y - 1
    x3 = x2*y
    x4 = x1*x3
    x5 = t + x - y
    x6 = alpha*cos(x5)
    x7 = x*x6
    x8 = 2*x0
    x9 = alpha*x*x4*sin(x5)
    x10 = pi*t
    x11 = x*x10
    x12 = sin(x11)
    x13 = 2*x*x12
    x14 = 4*x0
    x15 = x12*x14
    x16 = cos(x11)
    x17 = x11*x16
    x18 = 2*x10
    x19 = x1*x16
    x20 = pi**2
    x21 = t**2
    x22 = x10*y
    x23 = cos(x22)
    x24 = 2*x23
    x25 = sin(x22)
    x26 = x16*x25
    x27 = x1*x26
    x28 = 2*x25
    x29 = x*x16*x28
    x30 = x0*x29
    x31 = x30*y
    x32 = x13*x23
    x33 = x23*x3
    x34 = 6*x0
    x35 = x0**2
    x36 = x35*y
    x37 = -x2
    x38 = x12*x25
    x39 = 3*x11*x38
    x40 = x35*x37
    x41 = x23*x37
    x42 = x22*x40
    x43 = x20*x21
    x44 = x36*x37
    x45 = x37*y
    x46 = x25*x45
    x47 = x38*x42
    x48 = x17*x23
    x49 = x40*x48
    x50 = x36*x48
    x51 = x11*x12
    x52 = x12*x23
    x53 = x0*x32
    x54 = x29*x43*x44 + x36*x52 - x37*x53 - x40*x52 + x53*y
    return (-lam*(pi*t*x*x1*x12*x2*x25 + pi*t*x*x1*x12*x25*y + 2*x*x1*x12*x2*x20*x21*x23*y - x15*x33 - x17*x33*x34 - 3*x19*x2*x22*x23 - x2*x27 - x2*x30 - x27*y - x3*x32 - x31) - mu*x24*x3*(x*x1*x12*x20*x21 - x13 - x14*x17 - x15 - x18*x19) + mu*(-x16*x23*x42 - x17*x41*x8*y + x26*x36 - x26*x40 - x30*x37 + x31 + x32*x35 + x32*x43*x44 - x36*x39 + x39*x40) - x3*x7*x8 - x4*x6 + x9, lam*(x0*x28*x45*x51 + x29*x35 + x47 - 3*x49 + 3*x50 + x54) + 2*mu*x*x16*x35*(-x18*x41 + x22*x24 + x28 + x43*x46) + mu*(-x14*x26*x45 - x29*x45 + x34*x46*x51 + 3*x47 - x49 + x50 + x54) - x1*x2*x7 - x1*x7*y - x9)


def source(x, y, t, lam, mu, alpha, c0, kp):
    x0 = t + x - y
    x1 = sin(x0)
    x2 = lam**(-1.0)
    x3 = x - 1
    x4 = x3**2
    x5 = x*x4
    x6 = y - 1
    x7 = x6*y
    x8 = cos(x0)
    x9 = 2*x8
    x10 = 2*x1
    x11 = 4*x3
    x12 = x*x1
    x13 = -x6
    x14 = x3**2
    x15 = y**2
    x16 = x14*x15
    x17 = pi*t
    x18 = x*x17
    x19 = cos(x18)
    x20 = x17*y
    x21 = cos(x20)
    x22 = x**2
    x23 = sin(x18)
    x24 = sin(x20)
    x25 = x23*x24
    x26 = x13*x25
    x27 = x13*x14
    return (alpha*x2*(alpha*x12*x13*x14*y + pi*lam*(4*x*x13*x14*x19*x21*y - 2*x*x15*x26*x3 - x*x16*x19*x21 - 2*x13*x16*x18*x19*x24 + 2*x13*x19*x21*x22*x3*y + x14*x22*x23*x24*y - x16*x26 - 2*x20*x21*x22*x23*x27 - x22*x25*x27)) - kp*(-x5*(x10*x6 + x10*y - x7*x8 + x9) + x6*y*(-x*x9 + x10*x4 + x11*x12 - x11*x8 + x5*x8)) + x1*x5*x7*(alpha**2*x2 + c0),)
