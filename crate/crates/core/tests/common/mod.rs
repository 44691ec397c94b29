//! Oracles shared by the integration tests.

use std::collections::HashMap;

pub fn is_prime(n: i64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Solvability of `a x^2 + b y^2 = z^2` over `Q_p` for odd `p`.
///
/// The diagonal form is normalized until at most one coefficient is
/// divisible by `p`; the conic is then solvable iff it has a smooth point
/// mod `p`, which lifts by Hensel's lemma.
pub struct ConicOracle {
    p: i64,
    squares: Vec<bool>,
    memo: HashMap<[i64; 3], bool>,
}

impl ConicOracle {
    pub fn new(p: i64) -> ConicOracle {
        let mut squares = vec![false; p as usize];
        for x in 0..p {
            squares[(x * x % p) as usize] = true;
        }
        ConicOracle { p, squares, memo: HashMap::new() }
    }

    fn normalize(&self, a: i64, b: i64) -> [i64; 3] {
        let p = self.p;
        let mut c = [a, b, -1];
        loop {
            for x in c.iter_mut() {
                while *x % (p * p) == 0 {
                    *x /= p * p;
                }
            }
            let divisible: Vec<usize> = (0..3).filter(|&i| c[i] % p == 0).collect();
            if divisible.len() < 2 {
                break;
            }
            // Scale the remaining variable by p and divide the equation by p.
            for (i, x) in c.iter_mut().enumerate() {
                if divisible[..2].contains(&i) {
                    *x /= p;
                } else {
                    *x *= p;
                }
            }
        }
        // Put a unit coefficient last.
        if c[2] % p == 0 {
            c.swap(0, 2);
        }
        c.map(|x| x.rem_euclid(p))
    }

    fn inverse(&self, x: i64) -> i64 {
        let p = self.p;
        (1..p).find(|y| x * y % p == 1).unwrap()
    }

    pub fn solvable(&mut self, a: i64, b: i64) -> bool {
        let c = self.normalize(a, b);
        if let Some(&r) = self.memo.get(&c) {
            return r;
        }
        let p = self.p;
        let inv = self.inverse(c[2]);
        let mut found = false;
        'outer: for x in 0..p {
            for y in 0..p {
                let s = (c[0] * x * x + c[1] * y * y) % p;
                let r = (p - s) % p * inv % p;
                let smooth_at_zero = c[0] * x % p != 0 || c[1] * y % p != 0;
                if (r != 0 && self.squares[r as usize]) || (r == 0 && smooth_at_zero) {
                    found = true;
                    break 'outer;
                }
            }
        }
        self.memo.insert(c, found);
        found
    }
}
