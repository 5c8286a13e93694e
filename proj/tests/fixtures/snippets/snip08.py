import math
from os import path

total = 0

def bump():
    global total
    total += 1
    return math.floor(total)
