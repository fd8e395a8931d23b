//! Arithmetic in the finite field `F_{p^n}`, the trace map down to `F_p`,
//! and brute-force point counting for curves `y^p - y = f(x)`.
//!
//! Elements are dense little-endian coefficient vectors of length `n` over
//! `F_p` in the power basis of a fixed monic irreducible modulus. The modulus
//! is chosen deterministically (smallest in lexicographic coefficient order,
//! most significant coefficient first) so that runs are reproducible.

use crate::curve::CurveSpec;
use crate::error::Error;
use crate::padic::is_prime;
use crate::Result;

/// Default ceiling on `p^n` for full-field enumerations.
pub const DEFAULT_ENUM_BUDGET: u128 = 100_000_000;

/// A concrete model of `F_{p^n}`: modulus, reduction rows, and the traces of
/// the power basis. Immutable after construction.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    p: u64,
    n: usize,
    /// `h = x^n + tail[n-1] x^{n-1} + ... + tail[0]`.
    tail: Vec<u64>,
    /// `reduce[t] = x^{n+t} mod h` for `t = 0..n-1`.
    reduce: Vec<Vec<u64>>,
    /// `trace_basis[i] = Tr(x^i)` for `i = 0..n`.
    trace_basis: Vec<u64>,
    size: u128,
}

/// Schoolbook product of polynomials over `F_p` (no reduction).
fn poly_mul_mod_p(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    out
}

fn poly_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Remainder of `a` modulo the monic polynomial `h` over `F_p`.
fn poly_rem(p: u64, a: &[u64], h: &[u64]) -> Vec<u64> {
    debug_assert_eq!(*h.last().unwrap(), 1, "monic divisor");
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dh = h.len() - 1;
    while r.len() > dh {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dh;
        if lead != 0 {
            for (j, &hj) in h.iter().enumerate().take(dh) {
                let idx = shift + j;
                // Add p before subtracting to stay in unsigned territory.
                r[idx] = (r[idx] + p - lead * hj % p) % p;
            }
        }
        r.pop();
        poly_trim(&mut r);
    }
    r
}

fn modpow_u64(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

/// Inverse of `c` modulo the prime `p` via Fermat.
fn inv_mod_p(p: u64, c: u64) -> u64 {
    debug_assert!(c % p != 0);
    modpow_u64(c, p - 2, p)
}

/// `x^e mod h` over `F_p` by square-and-multiply on polynomials.
fn poly_x_powmod(p: u64, e: u128, h: &[u64]) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = vec![0u64, 1];
    base = poly_rem(p, &base, h);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(p, &poly_mul_mod_p(p, &acc, &base), h);
        }
        base = poly_rem(p, &poly_mul_mod_p(p, &base, &base), h);
        e >>= 1;
    }
    acc
}

/// Monic gcd over `F_p`.
fn poly_gcd(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        // Make b monic, then take the remainder.
        let inv = inv_mod_p(p, *b.last().unwrap());
        let monic: Vec<u64> = b.iter().map(|&c| c * inv % p).collect();
        let r = poly_rem(p, &a, &monic);
        a = b;
        b = r;
    }
    if let Some(&lead) = a.last() {
        let inv = inv_mod_p(p, lead);
        for c in &mut a {
            *c = *c * inv % p;
        }
    }
    a
}

/// Rabin irreducibility test for a monic `h` of degree `n` over `F_p`:
/// `x^{p^n} = x (mod h)` and `gcd(x^{p^{n/q}} - x, h) = 1` for every prime
/// `q | n`. The two conditions exclude factors of every proper degree.
fn is_irreducible(p: u64, h: &[u64]) -> bool {
    let n = (h.len() - 1) as u64;
    let pn = (p as u128).pow(n as u32);
    let frob_n = poly_x_powmod(p, pn, h);
    let mut xpoly = vec![0u64, 1];
    xpoly = poly_rem(p, &xpoly, h);
    if frob_n != xpoly {
        return false;
    }
    let mut m = n;
    let mut q = 2;
    let mut primes = Vec::new();
    while q * q <= m {
        if m % q == 0 {
            primes.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for q in primes {
        let e = (p as u128).pow((n / q) as u32);
        let mut g = poly_x_powmod(p, e, h);
        // g := g - x mod h
        if g.len() < 2 {
            g.resize(2, 0);
        }
        g[1] = (g[1] + p - 1) % p;
        poly_trim(&mut g);
        let gcd = poly_gcd(p, &g, h);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}

/// Builds `F_{p^n}` with the deterministic modulus: the first `k = 0, 1, ...`
/// whose base-`p` digits (digit `i` = coefficient of `x^i`) make
/// `x^n + tail` irreducible. Ordering by `k` is lexicographic on the tail
/// with the highest-degree coefficient most significant.
pub fn build_extension(p: u64, n: u64) -> Result<FieldCtx> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::InvalidInput("extension degree must be >= 1".into()));
    }
    if n > 32 {
        return Err(Error::InvalidInput(format!(
            "extension degree {n} is beyond any enumerable size"
        )));
    }
    let n = n as usize;
    let size = (p as u128)
        .checked_pow(n as u32)
        .ok_or_else(|| Error::InvalidInput(format!("p^n overflows: p={p} n={n}")))?;

    let h;
    let mut k = 0u128;
    loop {
        // tail from the digits of k (little-endian digit i = coefficient of x^i).
        let mut tail = vec![0u64; n];
        let mut kk = k;
        for slot in tail.iter_mut() {
            *slot = (kk % p as u128) as u64;
            kk /= p as u128;
        }
        if kk > 0 {
            return Err(Error::InvalidInput(format!(
                "no irreducible modulus found for p={p} n={n}"
            )));
        }
        let mut cand = tail.clone();
        cand.push(1);
        if is_irreducible(p, &cand) {
            h = cand;
            break;
        }
        k += 1;
    }

    // Reduction rows: x^{n+t} mod h, built by multiplying by x and folding.
    let tail: Vec<u64> = h[..n].to_vec();
    let mut reduce: Vec<Vec<u64>> = Vec::with_capacity(n.saturating_sub(1));
    let mut row: Vec<u64> = tail.iter().map(|&c| (p - c % p) % p).collect(); // x^n mod h
    for _ in 0..n.saturating_sub(1) {
        reduce.push(row.clone());
        // row := x * row mod h
        let top = row[n - 1];
        for i in (1..n).rev() {
            row[i] = row[i - 1];
        }
        row[0] = 0;
        if top != 0 {
            for i in 0..n {
                row[i] = (row[i] + top * ((p - tail[i] % p) % p)) % p;
            }
        }
    }

    let mut ctx = FieldCtx {
        p,
        n,
        tail,
        reduce,
        trace_basis: Vec::new(),
        size,
    };

    // Traces of the power basis via the Frobenius orbit sums
    // Tr(x^i) = sum_j (x^{p^j})^i; each must land in the prime subfield.
    let mut frob_powers = Vec::with_capacity(n);
    let x = ctx.gen_element();
    for j in 0..n {
        frob_powers.push(ctx.pow(&x, (p as u128).pow(j as u32)));
    }
    let mut trace_basis = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = ctx.zero();
        for fr in &frob_powers {
            let t = ctx.pow(fr, i as u128);
            acc = ctx.add(&acc, &t);
        }
        assert!(
            acc[1..].iter().all(|&c| c == 0),
            "trace of a basis element must lie in the prime subfield"
        );
        trace_basis.push(acc[0]);
    }
    ctx.trace_basis = trace_basis;
    Ok(ctx)
}

impl FieldCtx {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn extension_degree(&self) -> u64 {
        self.n as u64
    }

    /// Number of elements, `p^n`.
    pub fn size(&self) -> u128 {
        self.size
    }

    /// Full coefficient vector of the modulus, degree `n`, monic.
    pub fn modulus(&self) -> Vec<u64> {
        let mut h = self.tail.clone();
        h.push(1);
        h
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.n]
    }

    pub fn one(&self) -> Vec<u64> {
        self.from_prime(1)
    }

    /// Embedding of `F_p`.
    pub fn from_prime(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0; self.n];
        v[0] = c % self.p;
        v
    }

    /// The class of `x` itself (equals `from_prime` of the tail root when n = 1).
    pub fn gen_element(&self) -> Vec<u64> {
        if self.n == 1 {
            // x = -tail[0] in the prime field.
            self.from_prime((self.p - self.tail[0] % self.p) % self.p)
        } else {
            let mut v = vec![0; self.n];
            v[1] = 1;
            v
        }
    }

    /// The element whose odometer index is `idx` (base-`p` digits of `idx`).
    pub fn element_from_index(&self, idx: u128) -> Vec<u64> {
        debug_assert!(idx < self.size);
        let mut v = vec![0; self.n];
        let mut k = idx;
        for slot in v.iter_mut() {
            *slot = (k % self.p as u128) as u64;
            k /= self.p as u128;
        }
        v
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a.len(), self.n);
        debug_assert_eq!(b.len(), self.n);
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter().map(|&x| (self.p - x % self.p) % self.p).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.add(a, &self.neg(b))
    }

    /// Schoolbook product followed by folding `x^{n+t}` through the
    /// precomputed reduction rows.
    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a.len(), self.n);
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let p = self.p;
        let mut conv = vec![0u64; 2 * n - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                conv[i + j] = (conv[i + j] + ai * bj) % p;
            }
        }
        let mut out: Vec<u64> = conv[..n].to_vec();
        for t in 0..n.saturating_sub(1) {
            let c = conv[n + t];
            if c == 0 {
                continue;
            }
            let row = &self.reduce[t];
            for i in 0..n {
                out[i] = (out[i] + c * row[i]) % p;
            }
        }
        out
    }

    pub fn pow(&self, a: &[u64], mut e: u128) -> Vec<u64> {
        let mut acc = self.one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// `Tr(x) = x + x^p + ... + x^{p^{n-1}}`, via linearity over the
    /// precomputed traces of the power basis. Rejects vectors of the wrong
    /// length (elements of a different context).
    pub fn trace_to_prime(&self, x: &[u64]) -> Result<u64> {
        if x.len() != self.n {
            return Err(Error::WrongContext {
                expected: self.n as u64,
                got: x.len() as u64,
            });
        }
        let mut t = 0u64;
        for (xi, tb) in x.iter().zip(&self.trace_basis) {
            t = (t + xi * tb) % self.p;
        }
        Ok(t)
    }

    /// Visits every element exactly once in odometer order: the element with
    /// index `m` has coordinates the base-`p` digits of `m`, least
    /// significant digit in coordinate 0.
    pub fn for_each_element(&self, mut visit: impl FnMut(&[u64])) {
        let mut v = vec![0u64; self.n];
        loop {
            visit(&v);
            let mut i = 0;
            loop {
                if i == self.n {
                    return;
                }
                v[i] += 1;
                if v[i] < self.p {
                    break;
                }
                v[i] = 0;
                i += 1;
            }
        }
    }
}

/// Histogram of `Tr(f(x))` over all `x` in the field: `out[c]` counts the
/// `x` with trace `c`. `coeffs` are the prime-field coefficients of `f`,
/// lowest first (a constant term is honored, not dropped). This is the
/// shared enumeration core of point counting and exponential sums.
pub fn trace_histogram(ctx: &FieldCtx, coeffs: &[u64], budget: u128) -> Result<Vec<u128>> {
    if ctx.size > budget {
        return Err(Error::BudgetExceeded {
            needed: ctx.size,
            budget,
        });
    }
    let p = ctx.p;
    let scalars: Vec<u64> = coeffs.iter().map(|&c| c % p).collect();
    let mut hist = vec![0u128; p as usize];
    ctx.for_each_element(|x| {
        // Horner evaluation of f at x.
        let mut acc = ctx.zero();
        for &c in scalars.iter().rev() {
            acc = ctx.mul(&acc, x);
            acc[0] = (acc[0] + c) % p;
        }
        let t = ctx
            .trace_to_prime(&acc)
            .expect("evaluation stays in context");
        hist[t as usize] += 1;
    });
    Ok(hist)
}

/// Affine trace-zero count and total point count of `y^p - y = f(x)` over
/// `F_{p^n}`: `total = 1 + p * #{x : Tr(f(x)) = 0}` (the 1 is the single
/// point at infinity, which is totally ramified).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointCount {
    pub trace_zero: u128,
    pub total: u128,
}

pub fn point_count(curve: &CurveSpec, ctx: &FieldCtx, budget: u128) -> Result<PointCount> {
    if curve.p() != ctx.p {
        return Err(Error::WrongContext {
            expected: curve.p(),
            got: ctx.p,
        });
    }
    let coeffs: Vec<u64> = (0..=curve.d() as usize).map(|l| curve.coeff_u64(l)).collect();
    let hist = trace_histogram(ctx, &coeffs, budget)?;
    let trace_zero = hist[0];
    Ok(PointCount {
        trace_zero,
        total: 1 + curve.p() as u128 * trace_zero,
    })
}
