//! Local solvability of `z^2 = A x^2 + B y^2` by Hensel-checked digit search.

use num_traits::ToPrimitive;

use crate::field::{FieldCtx, NfElem};
use crate::place::{self, PrimeIdeal, Splitting};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Small {
    c0: i128,
    c1: i128,
}

/// Arithmetic in `O_K` with machine-size coordinates, plus capped `P`-adic orders.
pub(crate) struct LocalRing {
    kind: Splitting,
    p: i128,
    tr: i128,
    n: i128,
    root: i128,
    root_mod: i128,
    coord_mod: i128,
    pi: Small,
    digits: Vec<Small>,
}

impl LocalRing {
    /// Ring context able to measure orders up to `cap`.
    pub(crate) fn new(ctx: &FieldCtx, prime: &PrimeIdeal, cap: u32) -> LocalRing {
        let field = prime.field();
        let p = prime.p() as i128;
        let root_mod = p.pow(cap + 1);
        let root = match prime.kind() {
            Splitting::Split => {
                let r = place::local_rep(ctx, &split_root_elem(prime), prime, cap + 1);
                r.int_coords().0.to_i128().unwrap()
            }
            _ => prime.root().unwrap_or(0) as i128,
        };
        let gf = prime.residue_field();
        let digits = gf
            .elements()
            .map(|g| to_small(&place::lift(prime, &gf, g)))
            .collect();
        LocalRing {
            kind: prime.kind(),
            p,
            tr: field.omega_trace().to_i128().unwrap(),
            n: field.omega_norm().to_i128().unwrap(),
            root,
            root_mod,
            coord_mod: p.pow(cap + 1),
            pi: to_small(&prime.uniformizer()),
            digits,
        }
    }

    fn mul(&self, x: Small, y: Small) -> Small {
        let hi = x.c1 * y.c1;
        self.reduce(Small {
            c0: x.c0 * y.c0 - hi * self.n,
            c1: x.c0 * y.c1 + x.c1 * y.c0 + hi * self.tr,
        })
    }

    fn add(&self, x: Small, y: Small) -> Small {
        self.reduce(Small { c0: x.c0 + y.c0, c1: x.c1 + y.c1 })
    }

    fn sub(&self, x: Small, y: Small) -> Small {
        self.reduce(Small { c0: x.c0 - y.c0, c1: x.c1 - y.c1 })
    }

    fn reduce(&self, x: Small) -> Small {
        Small {
            c0: x.c0.rem_euclid(self.coord_mod),
            c1: x.c1.rem_euclid(self.coord_mod),
        }
    }

    fn pow(&self, x: Small, k: u32) -> Small {
        (0..k).fold(Small { c0: 1, c1: 0 }, |acc, _| self.mul(acc, x))
    }

    /// `min(v_P(x), cap)`.
    fn ord(&self, x: Small, cap: u32) -> u32 {
        let p = self.p as u64;
        match self.kind {
            Splitting::Rational => crate::arith::vp_i128(x.c0, p, cap),
            Splitting::Inert => crate::arith::vp_i128(x.c0, p, cap)
                .min(crate::arith::vp_i128(x.c1, p, cap)),
            Splitting::Ramified => {
                let norm = x.c0 * x.c0 + self.tr * x.c0 * x.c1 + self.n * x.c1 * x.c1;
                crate::arith::vp_i128(norm, p, cap)
            }
            Splitting::Split => {
                let v = (x.c0 + x.c1 * self.root).rem_euclid(self.root_mod);
                crate::arith::vp_i128(v, p, cap)
            }
        }
    }

    /// All residues `sum_{j<k} pi^j s_j` modulo `P^k`.
    fn residues_mod(&self, k: u32) -> Vec<Small> {
        let mut out = vec![Small { c0: 0, c1: 0 }];
        for j in 0..k {
            let pj = self.pow(self.pi, j);
            out = out
                .iter()
                .flat_map(|&r| self.digits.iter().map(move |&s| (r, s)))
                .map(|(r, s)| self.add(r, self.mul(pj, s)))
                .collect();
        }
        out
    }
}

fn split_root_elem(prime: &PrimeIdeal) -> NfElem {
    NfElem::omega(prime.field())
}

pub(crate) fn to_small(x: &NfElem) -> Small {
    let (c0, c1) = x.int_coords();
    Small {
        c0: c0.to_i128().expect("small coordinates"),
        c1: c1.to_i128().expect("small coordinates"),
    }
}

/// Whether the unit `u` (given modulo `P^{2e+1}`) is a square in `K_P`.
pub(crate) fn unit_is_square_dyadic(ctx: &FieldCtx, prime: &PrimeIdeal, u: &NfElem) -> bool {
    let e = prime.dyadic_e();
    let target = 2 * e + 1;
    let ring = LocalRing::new(ctx, prime, target);
    let u = to_small(u);
    ring.residues_mod(e + 1)
        .into_iter()
        .any(|y| ring.ord(ring.sub(ring.mul(y, y), u), target) >= target)
}

/// Whether `z^2 = A x^2 + B y^2` has a nontrivial solution over `K_P`, where
/// `A = pi^alpha u_a`, `B = pi^beta u_b` with `alpha, beta` in `{0, 1}` and
/// `u_a`, `u_b` integral units.
pub(crate) fn conic_solvable(
    ctx: &FieldCtx,
    prime: &PrimeIdeal,
    (alpha, ua): (u32, &NfElem),
    (beta, ub): (u32, &NfElem),
) -> bool {
    let e = prime.dyadic_e();
    let cap = 2 * e + 3;
    let ring = LocalRing::new(ctx, prime, cap);
    let a = ring.mul(ring.pow(ring.pi, alpha), to_small(ua));
    let b = ring.mul(ring.pow(ring.pi, beta), to_small(ub));
    let one = Small { c0: 1, c1: 0 };
    let zero = Small { c0: 0, c1: 0 };
    let form = |x: Small, y: Small, z: Small| {
        let ax = ring.mul(a, ring.mul(x, x));
        let by = ring.mul(b, ring.mul(y, y));
        ring.sub(ring.add(ax, by), ring.mul(z, z))
    };
    // Charts by which coordinate is a unit: z, else x, else y.
    let charts: [(u32, Chart); 3] = [
        (2 * e + 1, Chart::Z),
        (2 * e + 2 * alpha + 1, Chart::X),
        (2 * e + 2 * beta + 1, Chart::Y),
    ];
    for (depth, chart) in charts {
        let eval = |u: Small, v: Small| match chart {
            Chart::Z => form(u, v, one),
            Chart::X => form(one, u, v),
            Chart::Y => form(u, one, v),
        };
        // (free first var?, free second var?) at the first digit
        let (u_free, v_free) = match chart {
            Chart::Z => (true, true),
            Chart::X => (true, false),
            Chart::Y => (false, false),
        };
        let mut stack = vec![(0u32, zero, zero)];
        while let Some((level, u, v)) = stack.pop() {
            if ring.ord(eval(u, v), depth) >= depth {
                return true;
            }
            if level == depth {
                continue;
            }
            let pj = ring.pow(ring.pi, level);
            for &s in &ring.digits {
                if level == 0 && !u_free && s != zero {
                    continue;
                }
                let nu = ring.add(u, ring.mul(pj, s));
                for &t in &ring.digits {
                    if level == 0 && !v_free && t != zero {
                        continue;
                    }
                    let nv = ring.add(v, ring.mul(pj, t));
                    let next = level + 1;
                    if ring.ord(eval(nu, nv), next) >= next.min(depth) {
                        stack.push((next, nu, nv));
                    }
                }
            }
        }
    }
    false
}

#[derive(Clone, Copy)]
enum Chart {
    Z,
    X,
    Y,
}
