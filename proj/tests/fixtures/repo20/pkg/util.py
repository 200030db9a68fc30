import os
from x.y import z


def helper1():
    return os.name


def helper2(a, b):
    c = a + b
    return z(c)
