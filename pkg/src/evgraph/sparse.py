"""Compressed-row sparse storage and the products built on it.

A :class:`CSR` holds one sparsity pattern plus one value array. Edge-variant
filters keep many value arrays on a single pattern, so the block kernels take
the values explicitly and only read the index structure from the pattern.
Products are delegated to ``scipy.sparse``; many matrices on one pattern are
applied at once as a single block-diagonal product.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from evgraph.errors import InvalidArgument


@dataclass(frozen=True, eq=False)
class CSR:
    """Square-or-rectangular sparse matrix in compressed-row layout.

    Column indices within a row are strictly increasing. ``data`` is one
    value per stored entry; entries are stored even when their value is 0 so
    the pattern can be shared by learnable coefficient matrices.
    """

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    shape: tuple

    def __post_init__(self):
        indptr = np.asarray(self.indptr, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        data = np.asarray(self.data, dtype=float)
        rows, cols = self.shape
        if indptr.shape != (rows + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise InvalidArgument("malformed indptr")
        if np.any(np.diff(indptr) < 0):
            raise InvalidArgument("indptr must be non-decreasing")
        if data.shape[:1] != indices.shape:
            raise InvalidArgument("data and indices lengths differ")
        if len(indices) and (indices.min() < 0 or indices.max() >= cols):
            raise InvalidArgument("column index out of range")
        # strictly increasing columns inside each row
        if len(indices) > 1:
            step = np.diff(indices)
            same_row = np.repeat(np.arange(rows), np.diff(indptr))
            inside = same_row[1:] == same_row[:-1]
            if np.any(step[inside] <= 0):
                raise InvalidArgument("row index lists must be strictly sorted without duplicates")
        for name, value in (("indptr", indptr), ("indices", indices), ("data", data)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "shape", (int(rows), int(cols)))

    @classmethod
    def from_coo(cls, rows, cols, values, shape):
        """Build from coordinate triples; duplicates are rejected."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if len(rows) > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                raise InvalidArgument("duplicate entries in coordinate input")
        if len(rows) and (rows.min() < 0 or rows.max() >= shape[0]):
            raise InvalidArgument("row index out of range")
        indptr = np.zeros(shape[0] + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return cls(np.cumsum(indptr), cols, values, tuple(shape))

    @classmethod
    def from_dense(cls, dense, keep=None):
        """Store the nonzeros of ``dense`` (or the positions flagged in ``keep``)."""
        dense = np.asarray(dense, dtype=float)
        mask = dense != 0 if keep is None else np.asarray(keep, dtype=bool)
        rows, cols = np.nonzero(mask)
        return cls.from_coo(rows, cols, dense[rows, cols], dense.shape)

    @property
    def nnz(self):
        return len(self.indices)

    @cached_property
    def row_ids(self):
        """Row index of every stored entry."""
        return np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))

    @cached_property
    def _transpose_order(self):
        order = np.lexsort((self.row_ids, self.indices))
        counts = np.bincount(self.indices, minlength=self.shape[1])
        col_ptr = np.concatenate(([0], np.cumsum(counts)))
        return order, col_ptr

    def with_data(self, data):
        return CSR(self.indptr, self.indices, data, self.shape)

    def pattern_equals(self, other):
        return (
            self.shape == other.shape
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def positions(self):
        """Set of stored ``(row, col)`` pairs."""
        return set(zip(self.row_ids.tolist(), self.indices.tolist()))

    def to_dense(self, values=None):
        values = self.data if values is None else values
        out = np.zeros(self.shape + np.shape(values)[1:])
        out[self.row_ids, self.indices] = values
        return out

    def transpose(self):
        order, col_ptr = self._transpose_order
        return CSR(col_ptr, self.row_ids[order], self.data[order], self.shape[::-1])

    # -- kernels -----------------------------------------------------------
    def _scipy(self, values=None):
        values = self.data if values is None else np.asarray(values, dtype=float)
        return sp.csr_matrix((values, self.indices, self.indptr), shape=self.shape)

    def matmul(self, x, values=None):
        """Return ``A @ x`` along axis 0 of ``x``; ``values`` overrides the stored data."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.shape[1]:
            raise InvalidArgument(f"operand has {x.shape[0]} rows, matrix has {self.shape[1]} columns")
        out = self._scipy(values) @ x.reshape(x.shape[0], -1)
        return np.asarray(out).reshape((self.shape[0],) + x.shape[1:])

    def rmatmul(self, y, values=None):
        """Return ``A.T @ y`` along axis 0 of ``y``."""
        y = np.asarray(y, dtype=float)
        if y.shape[0] != self.shape[0]:
            raise InvalidArgument(f"operand has {y.shape[0]} rows, matrix has {self.shape[0]} rows")
        out = self._scipy(values).T @ y.reshape(y.shape[0], -1)
        return np.asarray(out).reshape((self.shape[1],) + y.shape[1:])

    def _block_structure(self, num_blocks):
        cache = self.__dict__.setdefault("_blocks", {})
        if num_blocks not in cache:
            offsets = np.arange(num_blocks)
            indptr = (self.indptr[None, :-1] + self.nnz * offsets[:, None]).ravel()
            indptr = np.append(indptr, self.nnz * num_blocks)
            indices = (self.indices[None, :] + self.shape[1] * offsets[:, None]).ravel()
            cache[num_blocks] = (indptr, indices)
        return cache[num_blocks]

    def _block_matrix(self, values):
        num_blocks = values.shape[1]
        indptr, indices = self._block_structure(num_blocks)
        shape = (self.shape[0] * num_blocks, self.shape[1] * num_blocks)
        return sp.csr_matrix((np.ascontiguousarray(values.T).ravel(), indices, indptr), shape=shape)

    def block_matmul(self, values, x):
        """Apply ``num_blocks`` matrices that share this pattern, one per block.

        ``values`` is ``(nnz, num_blocks)``; ``x`` is ``(num_blocks, cols, ...)``.
        Returns ``(num_blocks, rows, ...)``.
        """
        nb = values.shape[1]
        out = self._block_matrix(values) @ x.reshape(nb * self.shape[1], -1)
        return out.reshape((nb, self.shape[0]) + x.shape[2:])

    def block_rmatmul(self, values, y):
        """Transposed counterpart of :meth:`block_matmul`."""
        nb = values.shape[1]
        out = self._block_matrix(values).T @ y.reshape(nb * self.shape[0], -1)
        return out.reshape((nb, self.shape[1]) + y.shape[2:])

    def block_edge_products(self, left, right):
        """Per block and stored entry ``(i, j)``: ``left[b, i] . right[b, j]`` over trailing axes.

        ``left`` is ``(num_blocks, rows, ...)``, ``right`` is ``(num_blocks, cols, ...)``;
        returns ``(nnz, num_blocks)``.
        """
        nb = left.shape[0]
        lhs = left.reshape(nb, self.shape[0], -1)[:, self.row_ids]
        rhs = right.reshape(nb, self.shape[1], -1)[:, self.indices]
        return np.einsum("bem,bem->eb", lhs, rhs)
