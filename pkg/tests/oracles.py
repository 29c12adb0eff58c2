"""Independent reference implementations used only by the tests.

None of these share code with the package beyond the point type: the
graph search walks the explicit placement graph, and the automaton
simulator works on Python sets.
"""

from collections import deque


def sqd(p, q):
    dx = float(p[0]) - float(q[0])
    dy = float(p[1]) - float(q[1])
    return dx * dx + dy * dy


def bfs_reach(A, B, dsq, diagonal=False):
    """Reachable placements (0-based) from (0, 0) in the explicit graph."""
    A = [tuple(p) for p in A]
    B = [tuple(p) for p in B]
    m, n = len(A), len(B)
    ok = lambda i, j: sqd(A[i], B[j]) <= dsq
    M = [[False] * n for _ in range(m)]
    if not ok(0, 0):
        return M
    M[0][0] = True
    todo = deque([(0, 0)])
    moves = [(1, 0), (0, 1)] + ([(1, 1)] if diagonal else [])
    while todo:
        i, j = todo.popleft()
        for di, dj in moves:
            a, b = i + di, j + dj
            if a < m and b < n and not M[a][b] and ok(a, b):
                M[a][b] = True
                todo.append((a, b))
    return M


def simulate_block(member_sets, s, start_valid, inputs, diagonal=False):
    """Set-level run of one block.

    ``member_sets[g]`` is the set of block disks (0-based) containing face
    ``g``.  Returns ``(final_valid_set, outputs)``.
    """
    S = set(start_valid)
    outs = []
    for g, phi in inputs:
        D = member_sets[g]
        seeds = set(S)
        if phi:
            seeds.add(0)
        if diagonal:
            seeds |= {j + 1 for j in S}
        new = set()
        for j in seeds:
            k = j
            while k in D and k < s:
                new.add(k)
                k += 1
        S = new
        outs.append(1 if (s - 1) in S else 0)
    return S, outs


def start_set(D, phi):
    S = set()
    if phi:
        k = 0
        while k in D:
            S.add(k)
            k += 1
    return S


def to_set(mask):
    return {k for k in range(mask.bit_length()) if mask >> k & 1}


def to_mask(S):
    return sum(1 << k for k in S)
