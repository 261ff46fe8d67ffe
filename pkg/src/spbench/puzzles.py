"""Edge-matching puzzles as polynomial and exponential root systems.

A puzzle has a fixed frame piece and a set of movable pieces.  Every edge
carries a color and an outward direction angle; a correct assembly makes each
edge coincide with exactly one partner edge of equal color pointing the
opposite way.  Two algebraic encodings turn assembly into root finding:

* linear: for every (color, direction) class, the signed sum of absolute edge
  positions must vanish, where partner-class edges enter with weight -1;
* exponential: the same signed sums with each position u replaced by
  exp(k . u) over a fixed set of integer frequency vectors k.

The linear system is only necessary.  The exponential system separates
translated fakes that the linear one accepts, because exp(k . u) responds
multiplicatively to shifts.  ``verify_geometric`` is the ground-truth check
that never consults either encoding.
"""

from __future__ import annotations

import math

import numpy as np

from .core import EvaluationError, ProblemInstance

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9

DEFAULT_K_SET = tuple(
    (kx, ky)
    for kx in (-2, -1, 0, 1, 2)
    for ky in (-2, -1, 0, 1, 2)
    if (kx, ky) != (0, 0)
)


def wrap_angle(a):
    """Reduce an angle to [0, 2*pi)."""
    a = float(a) % TWO_PI
    if a >= TWO_PI:
        a = 0.0
    return a


def _circ_diff(a, b):
    """Signed circular difference a - b in (-pi, pi]."""
    d = (a - b) % TWO_PI
    if d > math.pi:
        d -= TWO_PI
    return d


class Edge:
    """One edge of a piece: offset from the piece origin, a color name and
    the outward direction angle."""

    def __init__(self, offset, color, angle):
        offset = np.asarray(offset, dtype=float)
        if offset.shape != (2,):
            raise ValueError(f"edge offset must be a 2-vector, got shape {offset.shape}")
        self.offset = offset
        self.color = str(color)
        self.angle = wrap_angle(angle)


class Piece:
    def __init__(self, edges):
        edges = list(edges)
        if not edges:
            raise ValueError("a piece needs at least one edge")
        self.edges = edges


def signed_indicator(edge, color, angle, tol=ANGLE_TOL):
    """+1 if the edge belongs to class (color, angle), -1 if it belongs to
    the opposite-direction partner class, 0 otherwise."""
    if edge.color != color:
        return 0
    if abs(_circ_diff(edge.angle, angle)) <= tol:
        return 1
    if abs(_circ_diff(edge.angle, angle + math.pi)) <= tol:
        return -1
    return 0


def _cluster_angles(angles, tol=ANGLE_TOL):
    """Representative angles, merging values within tol (circularly)."""
    if not angles:
        return []
    ordered = sorted(wrap_angle(a) for a in angles)
    reps = [ordered[0]]
    for a in ordered[1:]:
        if a - reps[-1] > tol:
            reps.append(a)
    if len(reps) > 1 and (reps[0] + TWO_PI) - reps[-1] <= tol:
        reps.pop()
    return reps


def _find_rep(reps, angle, tol=ANGLE_TOL):
    a = wrap_angle(angle)
    for r in reps:
        if abs(_circ_diff(a, r)) <= tol:
            return r
    return None


class Puzzle:
    """Frame piece plus movable pieces, with the class bookkeeping shared by
    both encodings.

    Rejects unbalanced edge sets at construction: every (color, direction)
    class must contain exactly as many edges as its opposite-direction
    partner, else no assembly can exist and the encodings would be lying.
    """

    def __init__(self, frame, pieces, k_set=None, label=None):
        if not isinstance(frame, Piece):
            raise ValueError("frame must be a Piece")
        pieces = list(pieces)
        if not pieces:
            raise ValueError("need at least one movable piece")
        self.frame = frame
        self.pieces = pieces
        self.k_set = tuple((int(kx), int(ky)) for kx, ky in (k_set or DEFAULT_K_SET))
        if not self.k_set:
            raise ValueError("frequency set must be non-empty")

        all_edges = list(frame.edges)
        for piece in pieces:
            all_edges.extend(piece.edges)
        self.colors = sorted({e.color for e in all_edges})
        self._reps = _cluster_angles([e.angle for e in all_edges])

        counts = {}
        for e in all_edges:
            rep = _find_rep(self._reps, e.angle)
            counts[(e.color, rep)] = counts.get((e.color, rep), 0) + 1
        for (color, rep), cnt in sorted(counts.items()):
            partner = _find_rep(self._reps, rep + math.pi)
            partner_cnt = counts.get((color, partner), 0) if partner is not None else 0
            if cnt != partner_cnt:
                raise ValueError(
                    f"unbalanced edge classes: ({color}, {rep:.6g}) has {cnt} edges "
                    f"but its opposite class has {partner_cnt}"
                )

        # one class per unordered direction pair, keyed by the smaller angle
        seen = set()
        classes = []
        for (color, rep) in sorted(counts):
            partner = _find_rep(self._reps, rep + math.pi)
            if (color, partner) in seen:
                continue
            seen.add((color, rep))
            classes.append((color, rep))
        self.classes = classes
        self.label = label if label is not None else f"puzzle-{len(pieces)}p"

    def n_pieces(self):
        return len(self.pieces)

    def check_placement(self, placement):
        placement = np.asarray(placement, dtype=float)
        want = (len(self.pieces), 2)
        if placement.shape != want:
            raise ValueError(f"placement must have shape {want}, got {placement.shape}")
        return placement

    def placed_edges(self, placement):
        """All edges at absolute positions: (piece_index, edge, position).
        The frame has index -1 and translation zero."""
        placement = self.check_placement(placement)
        out = [(-1, e, e.offset.copy()) for e in self.frame.edges]
        for idx, piece in enumerate(self.pieces):
            for e in piece.edges:
                out.append((idx, e, placement[idx] + e.offset))
        return out

    def class_terms(self, placement):
        """Per class, the list of (piece_index, sign, absolute position) for
        every edge with nonzero signed indicator."""
        placed = self.placed_edges(placement)
        terms = {key: [] for key in self.classes}
        for idx, edge, pos in placed:
            for color, rep in self.classes:
                s = signed_indicator(edge, color, rep)
                if s != 0:
                    terms[(color, rep)].append((idx, s, pos))
                    break
        return terms


def linear_residual(puzzle, placement):
    """Signed position sums, two components per class."""
    terms = puzzle.class_terms(placement)
    out = np.zeros(2 * len(puzzle.classes))
    for c, key in enumerate(puzzle.classes):
        acc = np.zeros(2)
        for _, s, pos in terms[key]:
            acc += s * pos
        out[2 * c:2 * c + 2] = acc
    return out


def exponential_residual(puzzle, placement, k_set=None):
    """Signed exponential sums, one component per (class, frequency) pair.

    Each class is rescaled by its largest exponent so the evaluation stays
    in range; rescaling never moves a zero away from zero.
    """
    k_set = tuple(k_set) if k_set is not None else puzzle.k_set
    terms = puzzle.class_terms(placement)
    out = np.zeros(len(puzzle.classes) * len(k_set))
    pos = 0
    for key in puzzle.classes:
        entries = terms[key]
        for k in k_set:
            kv = np.asarray(k, dtype=float)
            exps = np.array([kv @ p for _, _, p in entries])
            shift = float(np.max(exps)) if len(exps) else 0.0
            val = sum(s * math.exp(e - shift) for (_, s, _), e in zip(entries, exps))
            if not math.isfinite(val):
                raise EvaluationError(f"exponential residual overflow in class {key}")
            out[pos] = val
            pos += 1
    return out


def verify_geometric(puzzle, placement, tol=ANGLE_TOL):
    """Ground truth: every edge must coincide with exactly one partner edge
    of equal color and opposite direction, within tol in position."""
    placed = puzzle.placed_edges(placement)
    n = len(placed)
    if n % 2 != 0:
        return False
    partners = []
    for i in range(n):
        _, ei, pi = placed[i]
        cand = []
        for j in range(n):
            if j == i:
                continue
            _, ej, pj = placed[j]
            if ej.color != ei.color:
                continue
            if abs(_circ_diff(ej.angle, ei.angle + math.pi)) > tol:
                continue
            if np.max(np.abs(pj - pi)) > tol:
                continue
            cand.append(j)
        if len(cand) != 1:
            return False
        partners.append(cand[0])
    return all(partners[partners[i]] == i for i in range(n))


def exp_coordinates(placement):
    """Componentwise exponential of a placement, the coordinates in which
    the exponential encoding is polynomial.  Reporting helper only; all
    solvers and residuals work on plain positions."""
    return np.exp(np.asarray(placement, dtype=float))


def generate_grid_puzzle(columns, rows, n_colors, seed, frame_color="border"):
    """Random rectangular puzzle of unit squares inside a frame.

    Interior edge colors are drawn uniformly from ``n_colors`` names; the
    frame contributes one inward-facing edge per boundary cell, all in
    ``frame_color``.  Returns (puzzle, solution) where the solution stacks
    the cell centers in piece order.
    """
    if columns < 1 or rows < 1:
        raise ValueError("grid must be at least 1x1")
    if n_colors < 1:
        raise ValueError("need at least one interior color")
    rng = np.random.default_rng(seed)
    palette = [f"c{i}" for i in range(n_colors)]
    if frame_color in palette:
        raise ValueError("frame color collides with the interior palette")

    vert = {(i, j): palette[rng.integers(n_colors)]
            for i in range(1, columns) for j in range(rows)}
    horiz = {(i, j): palette[rng.integers(n_colors)]
             for j in range(1, rows) for i in range(columns)}

    right, left, up, down = 0.0, math.pi, 0.5 * math.pi, 1.5 * math.pi
    pieces = []
    solution = []
    for j in range(rows):
        for i in range(columns):
            edges = [
                Edge((0.5, 0.0), vert.get((i + 1, j), frame_color), right),
                Edge((-0.5, 0.0), vert.get((i, j), frame_color), left),
                Edge((0.0, 0.5), horiz.get((i, j + 1), frame_color), up),
                Edge((0.0, -0.5), horiz.get((i, j), frame_color), down),
            ]
            pieces.append(Piece(edges))
            solution.append((i + 0.5, j + 0.5))

    frame_edges = []
    for j in range(rows):
        frame_edges.append(Edge((0.0, j + 0.5), frame_color, right))
        frame_edges.append(Edge((float(columns), j + 0.5), frame_color, left))
    for i in range(columns):
        frame_edges.append(Edge((i + 0.5, 0.0), frame_color, up))
        frame_edges.append(Edge((i + 0.5, float(rows)), frame_color, down))

    label = f"puzzle-{columns}x{rows}-c{n_colors}-s{seed}"
    puzzle = Puzzle(Piece(frame_edges), pieces, label=label)
    return puzzle, np.asarray(solution, dtype=float)


class PuzzleInstance(ProblemInstance):
    """Root system stacking the linear equations and the raw exponential
    equations (no per-class rescaling, so the map stays smooth for
    derivative checks; desk-scale puzzles keep the exponents small)."""

    family = "puzzle"
    _START_PAD = 1.0

    def __init__(self, puzzle, label=None):
        self.puzzle = puzzle
        super().__init__(2 * len(puzzle.pieces), label if label is not None else puzzle.label)
        frame_pos = np.array([e.offset for e in puzzle.frame.edges])
        self._lo = frame_pos.min(axis=0)
        self._hi = frame_pos.max(axis=0)

    def _placement(self, x):
        x = self.check_point(x)
        return x.reshape(len(self.puzzle.pieces), 2)

    def residual(self, x):
        placement = self._placement(x)
        lin = linear_residual(self.puzzle, placement)
        terms = self.puzzle.class_terms(placement)
        k_set = self.puzzle.k_set
        expo = np.zeros(len(self.puzzle.classes) * len(k_set))
        pos = 0
        try:
            for key in self.puzzle.classes:
                entries = terms[key]
                for k in k_set:
                    kv = np.asarray(k, dtype=float)
                    val = sum(s * math.exp(kv @ p) for _, s, p in entries)
                    if not math.isfinite(val):
                        raise EvaluationError(f"exponential term overflow in class {key}")
                    expo[pos] = val
                    pos += 1
        except OverflowError as exc:
            raise EvaluationError(f"exponential term overflow: {exc}") from exc
        return np.concatenate([lin, expo])

    def residual_jacobian(self, x):
        placement = self._placement(x)
        terms = self.puzzle.class_terms(placement)
        n_cls = len(self.puzzle.classes)
        k_set = self.puzzle.k_set
        rows = 2 * n_cls + n_cls * len(k_set)
        jac = np.zeros((rows, self.n))
        for c, key in enumerate(self.puzzle.classes):
            for idx, s, _ in terms[key]:
                if idx >= 0:
                    jac[2 * c, 2 * idx] += s
                    jac[2 * c + 1, 2 * idx + 1] += s
        row = 2 * n_cls
        try:
            for key in self.puzzle.classes:
                entries = terms[key]
                for k in k_set:
                    kv = np.asarray(k, dtype=float)
                    for idx, s, p in entries:
                        if idx < 0:
                            continue
                        w = s * math.exp(kv @ p)
                        jac[row, 2 * idx:2 * idx + 2] += w * kv
                    row += 1
        except OverflowError as exc:
            raise EvaluationError(f"exponential term overflow: {exc}") from exc
        return jac

    def energy(self, x):
        f = self.residual(x)
        return float(f @ f)

    def gradient(self, x):
        f = self.residual(x)
        jac = self.residual_jacobian(x)
        return 2.0 * jac.T @ f

    def params(self):
        def edge_dict(e):
            return {"b": [float(e.offset[0]), float(e.offset[1])],
                    "c": e.color, "theta": float(e.angle)}

        return {
            "frame": {"edges": [edge_dict(e) for e in self.puzzle.frame.edges]},
            "pieces": [{"edges": [edge_dict(e) for e in p.edges]}
                       for p in self.puzzle.pieces],
            "colors": list(self.puzzle.colors),
            "k_set": [list(k) for k in self.puzzle.k_set],
        }

    def sample_start(self, rng):
        lo = self._lo - self._START_PAD
        hi = self._hi + self._START_PAD
        pts = rng.uniform(lo, hi, size=(len(self.puzzle.pieces), 2))
        return pts.reshape(-1)
