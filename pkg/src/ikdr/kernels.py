"""Kernel family expressed through a scalar profile of the projected pair statistic.

Every kernel here is of the form k(x_i, x_j) = f(t_ij) where
t_ij = a_ij^T W W^T b_ij for a pair of vectors (a_ij, b_ij) derived from the
samples.  Two pair conventions occur:

* point pairs:      a = x_i, b = x_j      (t is the projected inner product)
* difference pairs: a = b = x_i - x_j     (t is the squared projected distance)

The profile f and its derivative f' are what the surrogate-matrix machinery
needs; kernel matrices themselves are only used for objective values and
spectral clustering affinities.
"""

from dataclasses import dataclass

import numpy as np

LINEAR = "linear"
SQUARED = "squared"
POLYNOMIAL = "poly"
GAUSSIAN = "gauss"
MULTIQUADRATIC = "multiquad"
RELATIVE_RBF = "relrbf"
CONIC = "conic"

MEMBERS = (LINEAR, SQUARED, POLYNOMIAL, GAUSSIAN, MULTIQUADRATIC, RELATIVE_RBF, CONIC)

POINT_PAIR = "point"
DIFFERENCE_PAIR = "difference"

_PAIR_KIND = {
    LINEAR: POINT_PAIR,
    POLYNOMIAL: POINT_PAIR,
    SQUARED: DIFFERENCE_PAIR,
    GAUSSIAN: DIFFERENCE_PAIR,
    MULTIQUADRATIC: DIFFERENCE_PAIR,
    RELATIVE_RBF: DIFFERENCE_PAIR,
}

MEDIAN = "median"


class KernelError(ValueError):
    """Invalid kernel description or kernel evaluation domain error."""


@dataclass(frozen=True)
class KernelSpec:
    """One member of the kernel family, or a conic combination of members.

    sigma may be the string "median" until resolved against data; every
    evaluation routine requires a resolved spec.  Conic parts are flattened at
    construction so parts are never themselves conic.
    """

    member: str
    sigma: object = None          # float, or MEDIAN until resolved (gauss)
    degree: int = 3               # poly
    offset: float = 1.0           # poly (c >= 0) and multiquad (c > 0)
    weights: tuple = ()           # conic
    parts: tuple = ()             # conic
    sigmas: tuple = None          # relrbf per-sample bandwidths, or None until resolved

    def __post_init__(self):
        if self.member not in MEMBERS:
            raise KernelError("unknown kernel member %r" % (self.member,))
        if self.member == POLYNOMIAL:
            if int(self.degree) != self.degree or self.degree < 1:
                raise KernelError("polynomial degree must be a positive integer")
            if self.offset < 0:
                raise KernelError("polynomial offset must be nonnegative")
        if self.member == MULTIQUADRATIC and not self.offset > 0:
            raise KernelError("multiquadratic offset must be strictly positive")
        if self.member == GAUSSIAN and self.sigma != MEDIAN:
            if self.sigma is not None and not float(self.sigma) > 0:
                raise KernelError("gaussian sigma must be strictly positive")
        if self.member == CONIC:
            if not self.parts:
                raise KernelError("conic combination needs at least one part")
            if len(self.weights) != len(self.parts):
                raise KernelError("conic weights and parts differ in length")
            flat_w, flat_p = [], []
            for w, p in zip(self.weights, self.parts):
                if not w > 0:
                    raise KernelError("conic weights must be strictly positive")
                if p.member == CONIC:
                    for wi, pi in zip(p.weights, p.parts):
                        flat_w.append(w * wi)
                        flat_p.append(pi)
                else:
                    flat_w.append(float(w))
                    flat_p.append(p)
            object.__setattr__(self, "weights", tuple(flat_w))
            object.__setattr__(self, "parts", tuple(flat_p))

    @property
    def pair_kind(self):
        if self.member == CONIC:
            kinds = {p.pair_kind for p in self.parts}
            return kinds.pop() if len(kinds) == 1 else "mixed"
        return _PAIR_KIND[self.member]


def linear_kernel():
    return KernelSpec(LINEAR)


def squared_kernel():
    return KernelSpec(SQUARED)


def polynomial_kernel(degree=3, offset=1.0):
    return KernelSpec(POLYNOMIAL, degree=degree, offset=float(offset))


def gaussian_kernel(sigma=MEDIAN):
    return KernelSpec(GAUSSIAN, sigma=sigma)


def multiquadratic_kernel(offset=1.0):
    return KernelSpec(MULTIQUADRATIC, offset=float(offset))


def relative_rbf_kernel(sigmas=None):
    if sigmas is not None:
        sigmas = tuple(float(s) for s in sigmas)
        if any(not s > 0 for s in sigmas):
            raise KernelError("per-sample bandwidths must be strictly positive")
    return KernelSpec(RELATIVE_RBF, sigmas=sigmas)


def conic_kernel(weights, parts):
    return KernelSpec(CONIC, weights=tuple(weights), parts=tuple(parts))


def _require_resolved(spec):
    if spec.member == GAUSSIAN and not isinstance(spec.sigma, (int, float)):
        raise KernelError("gaussian sigma is unresolved; call resolve() with data first")
    if spec.member == RELATIVE_RBF and spec.sigmas is None:
        raise KernelError("relative-RBF bandwidths are unresolved; call resolve() with data first")
    for p in spec.parts:
        _require_resolved(p)


def resolve(spec, X):
    """Fill data-dependent hyperparameters (sigma=median, per-sample bandwidths)."""
    X = np.asarray(X, dtype=float)
    if spec.member == CONIC:
        return conic_kernel(spec.weights, tuple(resolve(p, X) for p in spec.parts))
    if spec.member == GAUSSIAN and (spec.sigma == MEDIAN or spec.sigma is None):
        return gaussian_kernel(median_bandwidth(X))
    if spec.member == RELATIVE_RBF and spec.sigmas is None:
        return relative_rbf_kernel(relative_bandwidths(X))
    return spec


def kernel_value(spec, t, i=0, j=0):
    """Scalar profile f(t) for the pair statistic t.

    Only the relative-RBF member consults the sample indices (its bandwidth is
    sigma_i * sigma_j).  A conic spec sums its parts at the shared t.
    """
    m = spec.member
    if m in (LINEAR, SQUARED):
        return float(t)
    if m == POLYNOMIAL:
        return float((t + spec.offset) ** spec.degree)
    if m == GAUSSIAN:
        return float(np.exp(-t / (2.0 * spec.sigma ** 2)))
    if m == MULTIQUADRATIC:
        arg = t + spec.offset ** 2
        if arg < 0:
            raise KernelError("multiquadratic received t + c^2 < 0")
        return float(np.sqrt(arg))
    if m == RELATIVE_RBF:
        _require_resolved(spec)
        return float(np.exp(-t / (2.0 * spec.sigmas[i] * spec.sigmas[j])))
    return float(sum(w * kernel_value(p, t, i, j) for w, p in zip(spec.weights, spec.parts)))


def kernel_grad(spec, t, i=0, j=0):
    """Derivative f'(t) of the scalar profile, exact constants retained."""
    m = spec.member
    if m in (LINEAR, SQUARED):
        return 1.0
    if m == POLYNOMIAL:
        return float(spec.degree * (t + spec.offset) ** (spec.degree - 1))
    if m == GAUSSIAN:
        s2 = 2.0 * spec.sigma ** 2
        return float(-np.exp(-t / s2) / s2)
    if m == MULTIQUADRATIC:
        arg = t + spec.offset ** 2
        if arg < 0:
            raise KernelError("multiquadratic received t + c^2 < 0")
        return float(0.5 / np.sqrt(arg))
    if m == RELATIVE_RBF:
        _require_resolved(spec)
        ss = 2.0 * spec.sigmas[i] * spec.sigmas[j]
        return float(-np.exp(-t / ss) / ss)
    return float(sum(w * kernel_grad(p, t, i, j) for w, p in zip(spec.weights, spec.parts)))


def pair_statistic_matrix(X, W, kind):
    """Matrix of pair statistics t_ij for the projected data Z = XW."""
    Z = np.asarray(X, dtype=float) @ np.asarray(W, dtype=float)
    if kind == POINT_PAIR:
        return Z @ Z.T
    # squared distances via the stable expansion, clipped before any sqrt use
    g = np.einsum("ij,ij->i", Z, Z)
    T = g[:, None] + g[None, :] - 2.0 * (Z @ Z.T)
    np.maximum(T, 0.0, out=T)
    return T


def _sigma_products(spec, n):
    s = np.asarray(spec.sigmas, dtype=float)
    if s.shape[0] != n:
        raise KernelError(
            "relative-RBF has %d bandwidths but data has %d samples" % (s.shape[0], n)
        )
    return np.outer(s, s)


def profile_matrix(spec, T):
    """Elementwise f over a pair-statistic matrix (non-conic members)."""
    m = spec.member
    if m in (LINEAR, SQUARED):
        return T.copy()
    if m == POLYNOMIAL:
        return (T + spec.offset) ** spec.degree
    if m == GAUSSIAN:
        return np.exp(-T / (2.0 * spec.sigma ** 2))
    if m == MULTIQUADRATIC:
        return np.sqrt(T + spec.offset ** 2)
    if m == RELATIVE_RBF:
        _require_resolved(spec)
        return np.exp(-T / (2.0 * _sigma_products(spec, T.shape[0])))
    raise KernelError("profile_matrix does not accept conic specs")


def profile_grad_matrix(spec, T):
    """Elementwise f' over a pair-statistic matrix (non-conic members)."""
    m = spec.member
    if m in (LINEAR, SQUARED):
        return np.ones_like(T)
    if m == POLYNOMIAL:
        return spec.degree * (T + spec.offset) ** (spec.degree - 1)
    if m == GAUSSIAN:
        s2 = 2.0 * spec.sigma ** 2
        return -np.exp(-T / s2) / s2
    if m == MULTIQUADRATIC:
        return 0.5 / np.sqrt(T + spec.offset ** 2)
    if m == RELATIVE_RBF:
        _require_resolved(spec)
        ss = 2.0 * _sigma_products(spec, T.shape[0])
        return -np.exp(-T / ss) / ss
    raise KernelError("profile_grad_matrix does not accept conic specs")


def _mirror_upper(K):
    # exact symmetry: keep the upper triangle, mirror it below
    U = np.triu(K)
    return U + np.triu(K, 1).T


_DEFAULT_THREADS = None
_BLOCK_ROWS = 256  # fixed decomposition, so results never depend on thread count


def set_default_threads(threads):
    """Worker-thread cap used by kernel_matrix when no explicit count is given.

    None (the default) keeps everything on the calling thread."""
    global _DEFAULT_THREADS
    _DEFAULT_THREADS = threads


def kernel_matrix(X, W, spec, threads=None):
    """n x n kernel matrix of the projected data; exactly symmetric.

    Callers are expected to pass W with orthonormal columns; the statistic
    t = a^T W W^T b is still well defined (and used by gradient checks) for
    general W, so no feasibility check is enforced here.
    """
    X = np.asarray(X, dtype=float)
    W = np.asarray(W, dtype=float)
    if X.ndim != 2 or W.ndim != 2 or X.shape[1] != W.shape[0]:
        raise KernelError(
            "dimension mismatch: X is %s, W is %s" % (X.shape, W.shape)
        )
    _require_resolved(spec)
    if spec.member == CONIC:
        parts = [w * kernel_matrix(X, W, p, threads=threads)
                 for w, p in zip(spec.weights, spec.parts)]
        out = parts[0]
        for m in parts[1:]:
            out = out + m
        return out
    if threads is None:
        threads = _DEFAULT_THREADS
    T = _pair_statistic_blocked(X, W, spec.pair_kind, threads)
    return _mirror_upper(profile_matrix(spec, T))


def _pair_statistic_blocked(X, W, kind, threads):
    if threads is None or X.shape[0] <= _BLOCK_ROWS:
        return pair_statistic_matrix(X, W, kind)
    # fixed-size row blocks, threads only consume them; rows written are
    # disjoint, so the result is bitwise independent of the thread count
    from concurrent.futures import ThreadPoolExecutor

    Z = X @ W
    n = Z.shape[0]
    T = np.empty((n, n), dtype=float)
    g = np.einsum("ij,ij->i", Z, Z) if kind == DIFFERENCE_PAIR else None

    def fill(bounds):
        lo, hi = bounds
        B = Z[lo:hi] @ Z.T
        if kind == DIFFERENCE_PAIR:
            B = g[lo:hi, None] + g[None, :] - 2.0 * B
            np.maximum(B, 0.0, out=B)
        T[lo:hi] = B

    blocks = [(lo, min(lo + _BLOCK_ROWS, n)) for lo in range(0, n, _BLOCK_ROWS)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        list(pool.map(fill, blocks))
    return T


def pairwise_distances(X):
    """Condensed vector of the n(n-1)/2 pairwise Euclidean distances."""
    X = np.asarray(X, dtype=float)
    T = pair_statistic_matrix(X, np.eye(X.shape[1]), DIFFERENCE_PAIR)
    iu = np.triu_indices(T.shape[0], k=1)
    return np.sqrt(T[iu])


def median_bandwidth(X):
    """Median pairwise Euclidean distance in the full feature space.

    If the median would be zero (heavy duplication), the median of the
    strictly positive distances is used instead; all-identical samples are an
    error.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        raise KernelError("median bandwidth needs at least two samples")
    d = pairwise_distances(X)
    med = float(np.median(d))
    if med > 0:
        return med
    pos = d[d > 0]
    if pos.size == 0:
        raise KernelError("degenerate data: zero bandwidth")
    return float(np.median(pos))


def relative_bandwidths(X):
    """Per-sample bandwidth: median distance from each sample to all others."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise KernelError("relative bandwidths need at least two samples")
    T = pair_statistic_matrix(X, np.eye(X.shape[1]), DIFFERENCE_PAIR)
    D = np.sqrt(T)
    out = np.empty(n)
    for i in range(n):
        row = np.delete(D[i], i)
        med = float(np.median(row))
        if med <= 0:
            pos = row[row > 0]
            if pos.size == 0:
                raise KernelError("degenerate data: zero bandwidth for sample %d" % i)
            med = float(np.median(pos))
        out[i] = med
    return out


_VALID_TOKENS = "linear, squared, poly:p=3,c=1, gauss:sigma=median|<float>, " \
    "multiquad:c=1, relrbf, conic:<w>*<token>+<w>*<token>"


def _format_num(x):
    if float(x) == int(x):
        return str(int(x))
    return repr(float(x))


def kernel_token(spec):
    """Serialize a spec to its plain-text token."""
    m = spec.member
    if m in (LINEAR, SQUARED, RELATIVE_RBF):
        return m
    if m == POLYNOMIAL:
        return "poly:p=%d,c=%s" % (spec.degree, _format_num(spec.offset))
    if m == GAUSSIAN:
        s = MEDIAN if spec.sigma in (None, MEDIAN) else repr(float(spec.sigma))
        return "gauss:sigma=%s" % s
    if m == MULTIQUADRATIC:
        return "multiquad:c=%s" % _format_num(spec.offset)
    return "conic:" + "+".join(
        "%s*%s" % (_format_num(w), kernel_token(p))
        for w, p in zip(spec.weights, spec.parts)
    )


def _split_conic_terms(body):
    # split on '+' except when it is an exponent sign (e.g. 1e+3)
    terms, start = [], 0
    for k, ch in enumerate(body):
        if ch == "+" and not (k > 0 and body[k - 1] in "eE"):
            terms.append(body[start:k])
            start = k + 1
    terms.append(body[start:])
    return terms


def _parse_params(text, token):
    params = {}
    for item in text.split(","):
        if "=" not in item:
            raise KernelError("malformed kernel token %r; expected key=value" % token)
        key, val = item.split("=", 1)
        params[key.strip()] = val.strip()
    return params


def parse_kernel_token(token):
    """Parse the plain-text kernel token; inverse of kernel_token()."""
    token = token.strip()
    if token.startswith("conic:"):
        weights, parts = [], []
        for term in _split_conic_terms(token[len("conic:"):]):
            if "*" not in term:
                raise KernelError(
                    "conic term %r must look like weight*token" % term
                )
            w, sub = term.split("*", 1)
            try:
                weights.append(float(w))
            except ValueError:
                raise KernelError("bad conic weight %r" % w) from None
            parts.append(parse_kernel_token(sub))
        return conic_kernel(weights, parts)
    name, _, rest = token.partition(":")
    if name == LINEAR and not rest:
        return linear_kernel()
    if name == SQUARED and not rest:
        return squared_kernel()
    if name == RELATIVE_RBF and not rest:
        return relative_rbf_kernel()
    if name == POLYNOMIAL:
        params = _parse_params(rest, token) if rest else {}
        try:
            return polynomial_kernel(
                degree=int(params.get("p", 3)), offset=float(params.get("c", 1.0))
            )
        except ValueError:
            raise KernelError("bad polynomial parameters in %r" % token) from None
    if name == GAUSSIAN:
        params = _parse_params(rest, token) if rest else {}
        s = params.get("sigma", MEDIAN)
        if s != MEDIAN:
            try:
                s = float(s)
            except ValueError:
                raise KernelError("bad gaussian sigma in %r" % token) from None
            if not s > 0:
                raise KernelError("gaussian sigma must be positive in %r" % token)
        return gaussian_kernel(s)
    if name == MULTIQUADRATIC:
        params = _parse_params(rest, token) if rest else {}
        try:
            return multiquadratic_kernel(offset=float(params.get("c", 1.0)))
        except ValueError:
            raise KernelError("bad multiquadratic offset in %r" % token) from None
    raise KernelError(
        "unknown kernel token %r; valid tokens: %s" % (token, _VALID_TOKENS)
    )
