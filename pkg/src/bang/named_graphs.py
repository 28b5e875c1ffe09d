"""Small graphs with known behaviour, 0-indexed (comments use 1-based labels)."""

import numpy as np

from .graph import from_edges

# non-ancestral BAP: 1->2->3->4 with 1<->3, 2<->4, 1<->4
CONFOUNDED_CHAIN = from_edges(4, [(1, 2), (2, 3), (3, 4)], [(1, 3), (2, 4), (1, 4)],
                              one_indexed=True)

# DAG on which naive certification would accept {2, 5} as ancestors of 3
DECOY = from_edges(5, [(1, 2), (1, 3), (3, 4), (4, 5)], one_indexed=True)

# 1->2->3 plus 1->3 with weights chosen so the 1->3 effect cancels after
# marginalizing 2
CANCELLATION = from_edges(3, [(1, 2), (2, 3), (1, 3)], one_indexed=True)
CANCELLATION_B = np.array([
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [1.0, -1.0, 0.0],
])

# ancestral graph 1->3<-2 with 1<->2
COLLIDER_CONFOUNDED = from_edges(3, [(1, 3), (2, 3)], [(1, 2)], one_indexed=True)

NAMED = {
    "confounded-chain": CONFOUNDED_CHAIN,
    "decoy": DECOY,
    "collider-confounded": COLLIDER_CONFOUNDED,
}
