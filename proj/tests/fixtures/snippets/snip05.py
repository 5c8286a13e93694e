def squares(ns):
    evens = [n * n for n in ns if n % 2 == 0]
    lookup = {n: n * n for n in ns}
    return sum(n for n in evens), lookup
