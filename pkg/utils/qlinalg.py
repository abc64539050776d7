import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from utils.classes import LinearAlgebraError, Permutation, to_fraction
from utils.symmetric import all_permutations, inverse, reduced_word

LOGGER = logging.getLogger(__name__)

Vector = List[Fraction]
SparseVector = Dict[int, Fraction]


def _qq(value) -> "QQ.dtype":
    q = to_fraction(value)
    return QQ(q.numerator, q.denominator)


def _fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


##################
# EXACT MATRICES #
##################
@dataclass(frozen=True, eq=False)
class QMatrix:
    """An exact rational matrix; a thin immutable wrapper over a sparse sympy DomainMatrix over QQ."""

    dm: DomainMatrix

    # CONSTRUCTORS
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls(DomainMatrix({}, (rows, cols), QQ))

    @classmethod
    def eye(cls, n: int) -> "QMatrix":
        return cls(DomainMatrix({i: {i: QQ(1)} for i in range(n)}, (n, n), QQ))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: Optional[int] = None) -> "QMatrix":
        n_cols = cols if cols is not None else (len(rows[0]) if rows else 0)
        data = {}
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise LinearAlgebraError(f"Row {i} has length {len(row)}, expected {n_cols}")
            entries = {j: _qq(v) for j, v in enumerate(row) if v != 0}
            if entries:
                data[i] = entries
        return cls(DomainMatrix(data, (len(rows), n_cols), QQ))

    @classmethod
    def from_columns(cls, columns: Sequence[SparseVector], rows: int) -> "QMatrix":
        data: Dict[int, Dict[int, object]] = {}
        for j, column in enumerate(columns):
            for i, v in column.items():
                if v != 0:
                    data.setdefault(i, {})[j] = _qq(v)
        return cls(DomainMatrix(data, (rows, len(columns)), QQ))

    @classmethod
    def from_entries(cls, entries: Dict[Tuple[int, int], Fraction], rows: int, cols: int) -> "QMatrix":
        data: Dict[int, Dict[int, object]] = {}
        for (i, j), v in entries.items():
            if v != 0:
                data.setdefault(i, {})[j] = _qq(v)
        return cls(DomainMatrix(data, (rows, cols), QQ))

    @classmethod
    def block_diagonal(cls, blocks: Sequence["QMatrix"]) -> "QMatrix":
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        entries = {}
        r0 = c0 = 0
        for b in blocks:
            for (i, j), v in b.items():
                entries[(r0 + i, c0 + j)] = v
            r0 += b.rows
            c0 += b.cols
        return cls.from_entries(entries, rows, cols)

    # SHAPE AND ENTRIES
    @property
    def rows(self) -> int:
        return self.dm.shape[0]

    @property
    def cols(self) -> int:
        return self.dm.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.dm.shape

    def _sparse(self) -> Dict[int, Dict[int, object]]:
        return self.dm.to_sparse().rep

    def items(self) -> Iterable[Tuple[Tuple[int, int], Fraction]]:
        for i, row in self._sparse().items():
            for j, v in row.items():
                if v:
                    yield (i, j), _fraction(v)

    @property
    def entries(self) -> List[Fraction]:
        """Row-major list of all rows × cols entries."""

        flat = [Fraction(0)] * (self.rows * self.cols)
        for (i, j), v in self.items():
            flat[i * self.cols + j] = v
        return flat

    def to_rows(self) -> List[List[Fraction]]:
        return [self.entries[i * self.cols:(i + 1) * self.cols] for i in range(self.rows)]

    def column(self, j: int) -> SparseVector:
        return {i: _fraction(row[j]) for i, row in self._sparse().items() if j in row and row[j]}

    def columns(self) -> List[SparseVector]:
        cols: List[SparseVector] = [dict() for _ in range(self.cols)]
        for (i, j), v in self.items():
            cols[j][i] = v
        return cols

    def dense_column(self, j: int) -> Vector:
        vec = [Fraction(0)] * self.rows
        for i, v in self.column(j).items():
            vec[i] = v
        return vec

    def is_zero(self) -> bool:
        return not any(True for _ in self.items())

    # ARITHMETIC
    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise LinearAlgebraError(f"Shape mismatch {self.shape} @ {other.shape}")
        return QMatrix(self.dm.to_sparse().matmul(other.dm.to_sparse()))

    def __add__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(self.dm.to_sparse() + other.dm.to_sparse())

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(self.dm.to_sparse() - other.dm.to_sparse())

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self.dm.to_sparse())

    def scale(self, q) -> "QMatrix":
        return QMatrix(self.dm.to_sparse().scalarmul(_qq(q)))

    def transpose(self) -> "QMatrix":
        return QMatrix(self.dm.to_sparse().transpose())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and (self - other).is_zero()

    def __hash__(self):
        return hash((self.shape, tuple(sorted(self.items()))))

    def apply(self, vector: SparseVector) -> SparseVector:
        """Matrix times a sparse column vector."""

        result: SparseVector = {}
        sparse = self._sparse()
        for i, row in sparse.items():
            total = Fraction(0)
            for j, v in row.items():
                if j in vector:
                    total += _fraction(v) * vector[j]
            if total:
                result[i] = total
        return result

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "QMatrix":
        row_pos = {r: k for k, r in enumerate(rows)}
        col_pos = {c: k for k, c in enumerate(cols)}
        entries = {}
        for (i, j), v in self.items():
            if i in row_pos and j in col_pos:
                entries[(row_pos[i], col_pos[j])] = v
        return QMatrix.from_entries(entries, len(rows), len(cols))

    def hstack(self, *others: "QMatrix") -> "QMatrix":
        result = self.dm.to_sparse()
        for other in others:
            if other.rows != self.rows:
                raise LinearAlgebraError("hstack row mismatch")
        if others:
            result = result.hstack(*[o.dm.to_sparse() for o in others])
        return QMatrix(result)

    def vstack(self, *others: "QMatrix") -> "QMatrix":
        result = self.dm.to_sparse()
        for other in others:
            if other.cols != self.cols:
                raise LinearAlgebraError("vstack column mismatch")
        if others:
            result = result.vstack(*[o.dm.to_sparse() for o in others])
        return QMatrix(result)

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        return len(rref(self)[1])

    def inverse(self) -> "QMatrix":
        if self.rows != self.cols:
            raise LinearAlgebraError("Only square matrices are invertible")
        if self.rows == 0:
            return self
        solution = solve_many(self, QMatrix.eye(self.rows))
        if solution is None:
            raise LinearAlgebraError("Matrix is singular")
        return solution

    def __repr__(self) -> str:
        return f"QMatrix({self.rows}x{self.cols}, nnz={sum(1 for _ in self.items())})"


@dataclass(frozen=True)
class Subspace:
    """A subspace of ℚ^ambient_dim given by linearly independent basis vectors (rows of `basis`)."""

    ambient_dim: int
    basis: QMatrix = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.basis is None:
            object.__setattr__(self, "basis", QMatrix.zeros(0, self.ambient_dim))
        if self.basis.cols != self.ambient_dim:
            raise LinearAlgebraError("Subspace basis vectors must have length ambient_dim")

    @property
    def dim(self) -> int:
        return self.basis.rows

    def vectors(self) -> List[SparseVector]:
        return self.basis.transpose().columns()

    def as_columns(self) -> QMatrix:
        return self.basis.transpose()

    def contains(self, vector: SparseVector) -> bool:
        if not vector:
            return True
        if self.dim == 0:
            return False
        return solve(self.as_columns(), _dense(vector, self.ambient_dim)) is not None

    def coordinates(self, vector: SparseVector) -> Optional[Vector]:
        return solve(self.as_columns(), _dense(vector, self.ambient_dim))


def _dense(vector: SparseVector, length: int) -> Vector:
    dense = [Fraction(0)] * length
    for i, v in vector.items():
        dense[i] = v
    return dense


def sparse(vector: Sequence[Fraction]) -> SparseVector:
    return {i: Fraction(v) for i, v in enumerate(vector) if v}


##############
# OPERATIONS #
##############
def rref(m: QMatrix) -> Tuple[QMatrix, List[int]]:
    """Reduced row-echelon form and strictly increasing pivot columns.

    Args:
        - m: any matrix.

    Returns:
        - reduced: the unique reduced row-echelon form of m.
        - pivot_columns: indices of the pivot columns.

    """

    if m.rows == 0 or m.cols == 0:
        return m, []
    reduced, pivots = m.dm.to_sparse().rref()
    return QMatrix(reduced.to_sparse()), list(pivots)


def kernel_basis(m: QMatrix) -> Subspace:
    """Null space of m, one basis vector per free column of rref(m)."""

    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    free = [j for j in range(m.cols) if j not in pivot_set]
    if not free:
        return Subspace(m.cols)
    pivot_rows = reduced._sparse()
    rows = []
    for f in free:
        vec = {f: Fraction(1)}
        for k, p in enumerate(pivots):
            entry = pivot_rows.get(k, {}).get(f)
            if entry:
                vec[p] = -_fraction(entry)
        rows.append(vec)
    basis = QMatrix.from_columns(rows, m.cols).transpose()
    return Subspace(m.cols, basis)


def column_space(m: QMatrix) -> Subspace:
    """Basis of the image of m: the nonzero rows of rref(mᵀ)."""

    if m.cols == 0 or m.rows == 0:
        return Subspace(m.rows)
    reduced, pivots = rref(m.transpose())
    basis = reduced.submatrix(list(range(len(pivots))), list(range(m.rows)))
    return Subspace(m.rows, basis)


def solve_many(m: QMatrix, b: QMatrix) -> Optional[QMatrix]:
    """Returns X with m @ X = b, or None when some column of b is outside image(m)."""

    if b.rows != m.rows:
        raise LinearAlgebraError(f"Right-hand side has {b.rows} rows, matrix has {m.rows}")
    if m.cols == 0:
        return QMatrix.zeros(0, b.cols) if b.is_zero() else None
    if b.cols == 0:
        return QMatrix.zeros(m.cols, 0)
    reduced, pivots = rref(m.hstack(b))
    if pivots and pivots[-1] >= m.cols:
        return None
    rows = reduced._sparse()
    entries = {}
    for k, p in enumerate(pivots):
        for j, v in rows.get(k, {}).items():
            if j >= m.cols and v:
                entries[(p, j - m.cols)] = _fraction(v)
    return QMatrix.from_entries(entries, m.cols, b.cols)


def solve(m: QMatrix, b: Sequence[Fraction]) -> Optional[Vector]:
    """Some x with m·x = b, or None when b ∉ image(m)."""

    if len(b) != m.rows:
        raise LinearAlgebraError(f"Vector of length {len(b)} against {m.rows} rows")
    column = QMatrix.from_columns([sparse(b)], m.rows)
    x = solve_many(m, column)
    if x is None:
        return None
    return x.dense_column(0) if x.cols else []


@dataclass(frozen=True)
class CohomologyData:
    """H = ker(d_out) / im(d_in) for one position of a complex.

    Args:
        - h_dim: dimension of the cohomology.
        - representatives: cocycles whose classes form the H basis.
        - cocycles: the full cocycle space.
        - coboundaries: the image of d_in.
        - project: cocycle vectors (columns) → H coordinates (columns).

    """

    h_dim: int
    representatives: Subspace
    cocycles: Subspace
    coboundaries: Subspace
    project: Callable[[QMatrix], QMatrix]

    def project_vector(self, vector: SparseVector) -> Vector:
        column = QMatrix.from_columns([vector], self.cocycles.ambient_dim)
        return self.project(column).dense_column(0) if self.h_dim else []


def cohomology(d_in: QMatrix, d_out: QMatrix, strategy: str = "first-pivot") -> CohomologyData:
    """Cohomology of C⁻ --d_in--> C --d_out--> C⁺ with canonical representatives.

    Args:
        - d_in: incoming differential, rows = dim C.
        - d_out: outgoing differential, cols = dim C.
        - strategy:
            - first-pivot: representatives are the first cocycle basis vectors completing the coboundaries,
            - last-pivot: same completion scanning the cocycle basis backwards.

    Returns:
        - CohomologyData for the middle position.

    """

    ambient = d_out.cols
    if d_in.rows != ambient:
        raise LinearAlgebraError(f"d_in lands in dimension {d_in.rows}, d_out starts at {ambient}")
    if d_in.cols and d_out.rows and not (d_out @ d_in).is_zero():
        raise LinearAlgebraError("d_out ∘ d_in ≠ 0: not a complex")

    cocycles = kernel_basis(d_out) if d_out.rows else Subspace(ambient, QMatrix.eye(ambient))
    coboundaries = column_space(d_in)
    z_vectors = cocycles.vectors()
    if strategy == "last-pivot":
        z_vectors = list(reversed(z_vectors))
    elif strategy != "first-pivot":
        raise LinearAlgebraError(f"Unknown section strategy {strategy!r}")

    b_vectors = coboundaries.vectors()
    representatives_list: List[SparseVector] = []
    if z_vectors:
        stacked = QMatrix.from_columns(b_vectors + z_vectors, ambient)
        _, pivots = rref(stacked)
        representatives_list = [z_vectors[p - len(b_vectors)] for p in pivots if p >= len(b_vectors)]
    h_dim = len(representatives_list)
    if h_dim != cocycles.dim - coboundaries.dim:
        raise LinearAlgebraError("Coboundaries are not contained in cocycles")

    representatives = Subspace(
        ambient,
        QMatrix.from_columns(representatives_list, ambient).transpose()
        if representatives_list
        else QMatrix.zeros(0, ambient),
    )
    frame = QMatrix.from_columns(representatives_list + b_vectors, ambient)

    def project(columns: QMatrix) -> QMatrix:
        if h_dim == 0:
            return QMatrix.zeros(0, columns.cols)
        solution = solve_many(frame, columns)
        if solution is None:
            raise LinearAlgebraError("Projecting a vector that is not a cocycle")
        return solution.submatrix(list(range(h_dim)), list(range(columns.cols)))

    LOGGER.debug("cohomology: ambient %d, Z %d, B %d, H %d", ambient, cocycles.dim, coboundaries.dim, h_dim)
    return CohomologyData(h_dim, representatives, cocycles, coboundaries, project)


def linear_section(p: QMatrix, strategy: str = "first-pivot") -> QMatrix:
    """Deterministic right inverse s of a surjection p (p @ s = identity).

    Picks the pivot columns of rref(p) (first-pivot) or of rref of p with its columns
    reversed (last-pivot), and inverts p restricted to them.

    """

    if p.rank() != p.rows:
        raise LinearAlgebraError(f"linear_section needs a surjective map, rank {p.rank()} < {p.rows}")
    if p.rows == 0:
        return QMatrix.zeros(p.cols, 0)
    if strategy == "last-pivot":
        order = list(reversed(range(p.cols)))
        _, pivots = rref(p.submatrix(list(range(p.rows)), order))
        pivots = sorted(order[k] for k in pivots)
    else:
        _, pivots = rref(p)
    square = p.submatrix(list(range(p.rows)), pivots)
    inv = square.inverse()
    entries = {}
    for (i, j), v in inv.items():
        entries[(pivots[i], j)] = v
    return QMatrix.from_entries(entries, p.cols, p.rows)


###########################
# SYMMETRIC GROUP ACTIONS #
###########################
class GroupAction:
    """A right action of Σ_n on ℚ^dim given by the matrices of the adjacent transpositions.

    The matrix of a product acts as A(p * q) = A(q) @ A(p), so that v·(p*q) = (v·p)·q.

    """

    def __init__(self, n: int, dim: int, generators: Sequence[QMatrix]):
        self.n = n
        self.dim = dim
        self.generators = list(generators)
        if len(self.generators) != max(n - 1, 0):
            raise LinearAlgebraError(f"Σ_{n} needs {max(n - 1, 0)} generator matrices")
        self._cache: Dict[Permutation, QMatrix] = {}

    def matrix(self, p: Permutation) -> QMatrix:
        if p in self._cache:
            return self._cache[p]
        result = QMatrix.eye(self.dim)
        for k in reduced_word(p):
            result = self.generators[k - 1] @ result
        self._cache[p] = result
        return result

    def all_matrices(self) -> Dict[Permutation, QMatrix]:
        return {p: self.matrix(p) for p in all_permutations(self.n)}


def trivial_action(n: int, dim: int) -> GroupAction:
    return GroupAction(n, dim, [QMatrix.eye(dim) for _ in range(max(n - 1, 0))])


def average(
    group_action_source: GroupAction,
    group_action_target: GroupAction,
    raw: QMatrix,
    progress: Optional[Callable[[Iterable], Iterable]] = None,
) -> QMatrix:
    """Equivariant projection (1/n!) Σ_σ σ·raw(σ⁻¹·) of a linear map.

    Args:
        - group_action_source: Σ_n action on the source space.
        - group_action_target: Σ_n action on the target space.
        - raw: matrix of the map, target rows × source columns.
        - progress: optional iterable wrapper (a tqdm bar).

    Returns:
        - the averaged map, equivariant for both actions.

    """

    n = group_action_source.n
    if group_action_target.n != n:
        raise LinearAlgebraError("Source and target actions are for different groups")
    perms = all_permutations(n)
    if n <= 1:
        return raw
    total = QMatrix.zeros(raw.rows, raw.cols)
    iterable = progress(perms) if progress else perms
    for p in iterable:
        total = total + group_action_target.matrix(p) @ raw @ group_action_source.matrix(inverse(p))
    return total.scale(Fraction(1, factorial(n)))


def is_equivariant(source: GroupAction, target: GroupAction, f: QMatrix) -> bool:
    return all(
        target.generators[k] @ f == f @ source.generators[k] for k in range(len(source.generators))
    )
