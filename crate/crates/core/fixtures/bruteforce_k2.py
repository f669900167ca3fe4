# Independent brute force for the p0=1/4, pR=1/2, pB=1, pRB=0, K=2 schedule.
# Values are frozen in tests/oracle_agreement.rs.
from fractions import Fraction as F
from itertools import product

p0, pR, pB = F(1,4), F(1,2), F(1)
def r1(col):  # round-1 prob for a vertex (all start (0,0))
    return {'W': 1-p0, 'R': p0/2, 'B': p0/2}[col]
def r2(r, b, col):
    red = blue = F(0)
    if b >= 2: red = F(1)
    elif r >= 2: blue = F(1)
    elif (r, b) == (0, 1): red = pR
    elif (r, b) == (1, 0): blue = pB
    return {'W': 1-red-blue, 'R': red, 'B': blue}[col]

# vertex ball: 0 centre; 1..3 children; 4..9 grandchildren
adj = {0: [1,2,3], 1: [0,4,5], 2: [0,6,7], 3: [0,8,9]}
for g in range(4, 10): adj[g] = [1 + (g-4)//2]
res = {'R': F(0), 'B': F(0), 'W': F(0)}
cat = {}
for c1 in product('WRB', repeat=10):
    w1 = F(1)
    for c in c1: w1 *= r1(c)
    movers = [v for v in range(4) if c1[v] == 'W']
    for c2 in product('WRB', repeat=len(movers)):
        col = list(c1); wt = w1
        for v, c in zip(movers, c2):
            rr = sum(c1[u] == 'R' for u in adj[v]); bb = sum(c1[u] == 'B' for u in adj[v])
            wt *= r2(rr, bb, c); col[v] = c
        if wt == 0: continue
        res[col[0]] += wt
        if col[0] == 'W':
            key = (sum(col[u] == 'R' for u in adj[0]), sum(col[u] == 'B' for u in adj[0]))
            cat[key] = cat.get(key, 0) + wt
# edge ball: 0-1 edge, 0: 2,3 ; 1: 4,5
eadj = {0: [1,2,3], 1: [0,4,5]}
p = F(0)
for c1 in product('WRB', repeat=6):
    w1 = F(1)
    for c in c1: w1 *= r1(c)
    movers = [v for v in range(2) if c1[v] == 'W']
    for c2 in product('WRB', repeat=len(movers)):
        col = list(c1); wt = w1
        for v, c in zip(movers, c2):
            rr = sum(c1[u] == 'R' for u in eadj[v]); bb = sum(c1[u] == 'B' for u in eadj[v])
            wt *= r2(rr, bb, c); col[v] = c
        if {col[0], col[1]} == {'R', 'B'}: p += wt
print('p', p); print('r', res['R']); print('b', res['B']); print('w', res['W'])
order = [(0,0),(0,1),(1,0),(1,1),(0,2),(2,0),(1,2),(2,1),(0,3),(3,0)]
for k in order: print('w%d%d' % k, cat.get(k, F(0)) / res['W'])
