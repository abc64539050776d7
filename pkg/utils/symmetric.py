import itertools
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from utils.classes import Permutation


# Permutations are tuples of images: p = (p(1), ..., p(n)).
# Products compose right to left: (p * q)(i) = p(q(i)).


def identity(n: int) -> Permutation:
    return tuple(range(1, n + 1))


def compose(p: Permutation, q: Permutation) -> Permutation:
    return tuple(p[q[i] - 1] for i in range(len(q)))


def inverse(p: Permutation) -> Permutation:
    inv = [0] * len(p)
    for i, image in enumerate(p, start=1):
        inv[image - 1] = i
    return tuple(inv)


def adjacent(n: int, k: int) -> Permutation:
    """Adjacent transposition s_k = (k k+1) in Σ_n, 1 <= k < n."""

    images = list(range(1, n + 1))
    images[k - 1], images[k] = images[k], images[k - 1]
    return tuple(images)


@lru_cache(maxsize=None)
def all_permutations(n: int) -> Tuple[Permutation, ...]:
    """All of Σ_n in lexicographic order of image tuples."""

    return tuple(itertools.permutations(range(1, n + 1)))


@lru_cache(maxsize=None)
def reduced_word(p: Permutation) -> Tuple[int, ...]:
    """Returns (k_1, ..., k_m) with p = s_{k_1} * s_{k_2} * ... * s_{k_m}, m = number of inversions.

    Bubble sort on the image tuple: each adjacent swap at positions (k, k+1) multiplies
    on the right by s_k.

    """

    images = list(p)
    swaps: List[int] = []
    changed = True
    while changed:
        changed = False
        for k in range(len(images) - 1):
            if images[k] > images[k + 1]:
                images[k], images[k + 1] = images[k + 1], images[k]
                swaps.append(k + 1)
                changed = True
    # images * s_{k1} * ... * s_{km} = identity, so p = s_{km} * ... * s_{k1}
    return tuple(reversed(swaps))


def delete_strand(p: Permutation, i: int) -> Permutation:
    """The permutation of Σ_{n-1} left after removing input i and output p(i)."""

    n = len(p)
    cut = p[i - 1]
    result = []
    for k in range(1, n):
        source = k if k < i else k + 1
        value = p[source - 1]
        result.append(value if value < cut else value - 1)
    return tuple(result)


def block_permutation(p: Permutation, i: int, n: int) -> Permutation:
    """The permutation Π with (α·p) ∘_i β = (α ∘_{p(i)} β)·Π, for β of arity n.

    Inputs of α other than p(i) keep their relative placement; the n inputs of β move
    as one block.

    """

    m = len(p)
    j = p[i - 1]
    total = m + n - 1
    pi_inverse = [0] * total

    def expand(k: int) -> int:
        return k if k < i else k + n - 1

    p_inv = inverse(p)
    for slot in range(1, m + 1):
        if slot == j:
            continue
        position = slot if slot < j else slot + n - 1
        pi_inverse[position - 1] = expand(p_inv[slot - 1])
    for q in range(1, n + 1):
        pi_inverse[j + q - 2] = i + q - 1
    return inverse(tuple(pi_inverse))


def insert_block(p: Permutation, i: int, m: int) -> Permutation:
    """id ⊕ p ⊕ id: the permutation p of Σ_n acting on positions i..i+n-1 of Σ_{m+n-1}."""

    n = len(p)
    images = list(range(1, m + n))
    for q in range(n):
        images[i - 1 + q] = p[q] + i - 1
    return tuple(images)


def sorting_permutation(keys: Sequence[int]) -> Permutation:
    """π with keys[π(1)-1] <= keys[π(2)-1] <= ...; stable."""

    order = np.argsort(np.asarray(keys, dtype=np.int64), kind="stable")
    return tuple(int(k) + 1 for k in order)


def koszul_sign(targets: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign of moving graded items into the order given by their target positions.

    Args:
        - targets: target position of the item currently at each place.
        - degrees: degree of the item currently at each place.

    Returns:
        - +1 or -1: each pair of odd items that changes relative order contributes a factor -1.

    """

    odd = [k for k, d in enumerate(degrees) if d % 2]
    swaps = 0
    for a in range(len(odd)):
        for b in range(a + 1, len(odd)):
            if targets[odd[a]] > targets[odd[b]]:
                swaps += 1
    return -1 if swaps % 2 else 1


def permutation_sign(p: Permutation) -> int:
    return koszul_sign([x for x in p], [1] * len(p))
