def dup():
    return 1


def dup():
    return 2


def unique():
    return 3
