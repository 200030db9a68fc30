# def commented_out():
#     return None


def actual():
    # local note
    return True  # trailing
