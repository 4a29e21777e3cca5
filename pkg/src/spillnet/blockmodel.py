"""CONCOR block partitioning and block-role classification.

CONCOR recursively bisects nodes by iterated correlation. A node's profile
is the concatenation of its out-row and in-column of the *binary* relation
(W > 0). Correlating nodes i and j excludes the coordinates belonging to
i and j themselves from both profiles (the classical self-tie deletion);
two profiles that are both constant after deletion correlate +1 when
identical and are undefined otherwise. The node-by-node correlation matrix
is then repeatedly replaced by the correlation of its own rows until every
off-diagonal entry is within the convergence tolerance of +/-1 (or 50
iterations pass), and the subset splits on the sign pattern of the first
row. Two levels of splitting give four blocks.

Determinism rules for the awkward cases:

* nodes whose top-level correlations are all undefined are held out and
  finally assigned to the block of their lowest-index neighbour (block 1
  if isolated);
* a subset whose converged matrix has a single sign (no split) falls back
  to splitting by node order, first half / second half;
* undefined correlations inside deeper subsets are treated as 0.

Roles follow the four-cell taxonomy on (internal-relationship ratio vs the
(g_k - 1)/(g - 1) expectation) x (external receipts zero or positive):
bilateral-spillover, main-benefit, main-spillover, brokers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import SpillnetError
from .network import SpilloverNetwork, network_density

logger = logging.getLogger(__name__)

MAX_CONCOR_ITER = 50

ROLE_BILATERAL = "bilateral-spillover"
ROLE_BENEFIT = "main-benefit"
ROLE_SPILLOVER = "main-spillover"
ROLE_BROKERS = "brokers"


@dataclass(frozen=True)
class BlockStat:
    size: int
    received_inside: int
    received_outside: int
    sent_inside: int
    sent_outside: int
    expected_internal_ratio: float
    actual_internal_ratio: float


@dataclass(frozen=True)
class BlockStats:
    blocks: dict[int, BlockStat]
    n_nodes: int
    total_edges: int


@dataclass(frozen=True, eq=False)
class BlockPartition:
    assignment: dict[str, int]  # node id -> block id (1-based)
    block_sizes: tuple[int, ...]
    roles: tuple[str, ...]
    density_matrix: np.ndarray
    image_matrix: np.ndarray


def _profiles(net: SpilloverNetwork) -> np.ndarray:
    binary = net.adjacency.astype(float)
    return np.hstack([binary, binary.T])  # row i: out-row then in-column


def _pair_corr(profiles: np.ndarray, i: int, j: int, n: int) -> float:
    keep = [k for k in range(n) if k != i and k != j]
    cols = keep + [n + k for k in keep]
    u = profiles[i, cols]
    v = profiles[j, cols]
    du = u - u.mean()
    dv = v - v.mean()
    su = float(du @ du)
    sv = float(dv @ dv)
    if su == 0.0 and sv == 0.0:
        return 1.0 if np.array_equal(u, v) else math.nan
    if su == 0.0 or sv == 0.0:
        return math.nan
    return float((du @ dv) / math.sqrt(su * sv))


def _corr_matrix(profiles: np.ndarray, members: list[int], n: int) -> np.ndarray:
    m = np.eye(len(members))
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            m[a, b] = m[b, a] = _pair_corr(profiles, members[a], members[b], n)
    return m


def _converged(m: np.ndarray, tol: float) -> bool:
    off = np.abs(m[~np.eye(m.shape[0], dtype=bool)])
    return bool(np.all(np.abs(1.0 - off) <= tol))


def _iterate(m: np.ndarray, tol: float) -> np.ndarray:
    for _ in range(MAX_CONCOR_ITER):
        if _converged(m, tol):
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            m = np.corrcoef(m)
        m = np.nan_to_num(m, nan=0.0)
        np.fill_diagonal(m, 1.0)
        m = np.clip(m, -1.0, 1.0)
    return m


def _order_split(members: list[int]) -> tuple[list[int], list[int]]:
    half = (len(members) + 1) // 2
    return members[:half], members[half:]


def _bisect(profiles, members: list[int], n: int, tol: float):
    if len(members) < 2:
        return members, []
    m = _corr_matrix(profiles, members, n)
    finite_off = np.isfinite(m[~np.eye(len(members), dtype=bool)])
    if not finite_off.any():
        logger.warning("degenerate profiles for %s; splitting by node order", members)
        return _order_split(members)
    m = np.nan_to_num(m, nan=0.0)
    np.fill_diagonal(m, 1.0)
    m = _iterate(m, tol)
    group1 = [mem for k, mem in enumerate(members) if m[0, k] >= 0]
    group2 = [mem for k, mem in enumerate(members) if m[0, k] < 0]
    if not group2:
        logger.warning("no sign split for %s; splitting by node order", members)
        return _order_split(members)
    return group1, group2


def _split(profiles, members: list[int], n: int, depth: int, tol: float) -> list[list[int]]:
    if depth == 0:
        return [members]
    g1, g2 = _bisect(profiles, members, n, tol)
    return _split(profiles, g1, n, depth - 1, tol) + _split(profiles, g2, n, depth - 1, tol)


def concor_split(
    net: SpilloverNetwork,
    max_depth: int = 2,
    convergence: float = 0.2,
) -> dict[str, int]:
    """Assign every node to one of 2**max_depth blocks (ids 1-based)."""
    n = net.n_nodes
    if n < 2**max_depth:
        raise SpillnetError(f"CONCOR to depth {max_depth} needs at least {2**max_depth} nodes")
    profiles = _profiles(net)
    members = list(range(n))

    top = _corr_matrix(profiles, members, n)
    degenerate = [
        members[k]
        for k in range(n)
        if not np.isfinite(np.delete(top[k], k)).any()
    ]
    core = [node for node in members if node not in degenerate]
    if len(core) < 2:
        leaves = _split(profiles, members, n, max_depth, convergence)
        degenerate = []
    else:
        if degenerate:
            logger.warning(
                "nodes %s have no defined profile correlations; "
                "assigning to their lowest-index neighbour's block",
                [net.node_ids[d] for d in degenerate],
            )
        leaves = _split(profiles, core, n, max_depth, convergence)

    block_of: dict[int, int] = {}
    for block_id, leaf in enumerate(leaves, start=1):
        for node in leaf:
            block_of[node] = block_id
    union = net.adjacency | net.adjacency.T
    for node in degenerate:
        target = 1
        for neighbour in np.flatnonzero(union[node]):
            if int(neighbour) in block_of:
                target = block_of[int(neighbour)]
                break
        block_of[node] = target
    return {net.node_ids[node]: block for node, block in sorted(block_of.items())}


def _member_indices(net: SpilloverNetwork, assignment: dict[str, int], n_blocks: int):
    if set(assignment) != set(net.node_ids):
        raise SpillnetError("assignment must cover exactly the network's nodes")
    members: list[list[int]] = [[] for _ in range(n_blocks)]
    for idx, node in enumerate(net.node_ids):
        block = assignment[node]
        if not 1 <= block <= n_blocks:
            raise SpillnetError(f"block id {block} outside 1..{n_blocks}")
        members[block - 1].append(idx)
    return members


def block_stats(
    net: SpilloverNetwork,
    assignment: dict[str, int],
    n_blocks: int = 4,
) -> BlockStats:
    """Binary relationship counts per block, split inside/outside."""
    adj = net.adjacency
    members = _member_indices(net, assignment, n_blocks)
    g = net.n_nodes
    blocks: dict[int, BlockStat] = {}
    for k, rows in enumerate(members, start=1):
        inside = np.zeros(g, dtype=bool)
        inside[rows] = True
        sent_inside = int(adj[np.ix_(rows, rows)].sum())
        sent_outside = int(adj[np.ix_(rows, ~inside)].sum()) if rows else 0
        received_outside = int(adj[np.ix_(~inside, rows)].sum()) if rows else 0
        sent_total = sent_inside + sent_outside
        expected = max(len(rows) - 1, 0) / (g - 1)
        actual = sent_inside / sent_total if sent_total > 0 else 0.0
        blocks[k] = BlockStat(
            size=len(rows),
            received_inside=sent_inside,
            received_outside=received_outside,
            sent_inside=sent_inside,
            sent_outside=sent_outside,
            expected_internal_ratio=expected,
            actual_internal_ratio=actual,
        )
    return BlockStats(blocks=blocks, n_nodes=g, total_edges=int(adj.sum()))


def classify_block(stats: BlockStats, block: int) -> str:
    """Four-cell role taxonomy on internal ratio and external receipts."""
    row = stats.blocks[block]
    internal_at_least_expected = row.actual_internal_ratio >= row.expected_internal_ratio
    receives_external = row.received_outside > 0
    if internal_at_least_expected:
        return ROLE_BENEFIT if receives_external else ROLE_BILATERAL
    return ROLE_BROKERS if receives_external else ROLE_SPILLOVER


def image_matrix(
    net: SpilloverNetwork,
    assignment: dict[str, int],
    n_blocks: int = 4,
) -> tuple[np.ndarray, np.ndarray]:
    """Block-to-block densities, thresholded (strictly) at the overall density."""
    adj = net.adjacency
    members = _member_indices(net, assignment, n_blocks)
    density = np.zeros((n_blocks, n_blocks))
    for r in range(n_blocks):
        for c in range(n_blocks):
            if r == c:
                possible = len(members[r]) * (len(members[r]) - 1)
            else:
                possible = len(members[r]) * len(members[c])
            if possible == 0:
                continue
            count = int(adj[np.ix_(members[r], members[c])].sum())
            density[r, c] = count / possible
    overall = network_density(net)
    image = (density > overall).astype(int)
    return density, image


def analyze_blocks(
    net: SpilloverNetwork,
    max_depth: int = 2,
    convergence: float = 0.2,
) -> BlockPartition:
    """Full block model: CONCOR split, role per block, density/image matrices."""
    n_blocks = 2**max_depth
    assignment = concor_split(net, max_depth, convergence)
    stats = block_stats(net, assignment, n_blocks)
    roles = tuple(classify_block(stats, k) for k in range(1, n_blocks + 1))
    density, image = image_matrix(net, assignment, n_blocks)
    sizes = tuple(stats.blocks[k].size for k in range(1, n_blocks + 1))
    return BlockPartition(
        assignment=assignment,
        block_sizes=sizes,
        roles=roles,
        density_matrix=density,
        image_matrix=image,
    )


def blocks_to_dot(partition: BlockPartition) -> str:
    """Graphviz rendering of the inter-block image graph."""
    n = partition.image_matrix.shape[0]
    lines = ["digraph blocks {"]
    for k in range(n):
        lines.append(
            f'  "Block {k + 1}" [label="Block {k + 1}\\n{partition.roles[k]} '
            f'(n={partition.block_sizes[k]})"];'
        )
    for r in range(n):
        for c in range(n):
            if partition.image_matrix[r, c]:
                lines.append(f'  "Block {r + 1}" -> "Block {c + 1}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
