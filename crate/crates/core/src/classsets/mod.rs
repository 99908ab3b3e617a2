//! Definite side: right-ideal classes of Eichler orders, unit weights, genus
//! lattices and genus-averaged representation numbers.

mod cache;
mod enumerate;

pub use cache::{render_entry, CacheStatus, ClassSetCache, CACHE_ENV_VAR};
pub use enumerate::QuadForm;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{gcd_u64, int, is_prime, prime_divisors, rat, rational_gcd, Rational};
use crate::orders::{eichler_order, maximal_order, Lattice, OrderLattice};
use crate::quatalg::{construct_algebra, QuaternionAlgebra};

/// `DN/12 * prod_{p|D} (1 - 1/p) * prod_{p|N} (1 + 1/p)`.
pub fn eichler_mass(d: u64, n: u64) -> Rational {
    let mut m = rat((d * n) as i64, 12);
    for p in prime_divisors(d) {
        m *= rat(p as i64 - 1, p as i64);
    }
    for p in prime_divisors(n) {
        m *= rat(p as i64 + 1, p as i64);
    }
    m
}

/// Eichler order `O_D(N)` inside the canonical maximal order of `B(D)`.
pub fn standard_eichler_order(d: u64, n: u64) -> Result<OrderLattice> {
    let alg = construct_algebra(d)?;
    let omax = maximal_order(&alg)?;
    eichler_order(&omax, n)
}

/// `nrd(I)`: the positive generator of the values of `nrd` on `I`.
pub fn lattice_norm(alg: &QuaternionAlgebra, l: &Lattice) -> Rational {
    let b = l.basis();
    let mut vals = Vec::new();
    for r in 0..4 {
        vals.push(alg.reduced_norm(&b[r]));
        for s in r + 1..4 {
            vals.push(alg.bilinear(&b[r], &b[s]));
        }
    }
    rational_gcd(vals.iter())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RightIdeal {
    pub lattice: Lattice,
    pub norm: Rational,
}

impl RightIdeal {
    pub fn new(alg: &QuaternionAlgebra, lattice: Lattice) -> Self {
        let norm = lattice_norm(alg, &lattice);
        RightIdeal { lattice, norm }
    }

    pub fn principal(o: &OrderLattice) -> Self {
        RightIdeal { lattice: o.lattice.clone(), norm: Rational::one() }
    }

    /// `I conj(I) / nrd(I)`.
    pub fn left_order(&self, alg: &QuaternionAlgebra) -> Lattice {
        self.lattice.product(alg, &self.lattice.conjugate()).scale(&self.norm.recip())
    }

    pub fn is_right_ideal_of(&self, o: &OrderLattice) -> bool {
        let p = self.lattice.product(&o.algebra, &o.lattice);
        p == self.lattice
    }
}

/// Positive definite form `nrd / scale` on `l`.
pub fn normalized_form(alg: &QuaternionAlgebra, l: &Lattice, scale: &Rational) -> Result<QuadForm> {
    QuadForm::from_lattice(alg, l, scale)
}

pub fn count_vectors(form: &QuadForm, m: u64) -> u64 {
    form.count_vectors(m)
}

/// `|O^x| / 2`.
pub fn unit_weight(o: &OrderLattice) -> Result<u64> {
    if !o.algebra.is_definite() {
        return Err(Error::Domain("unit weight needs a definite algebra".into()));
    }
    lattice_unit_weight(&o.algebra, &o.lattice)
}

fn lattice_unit_weight(alg: &QuaternionAlgebra, order: &Lattice) -> Result<u64> {
    let f = QuadForm::from_lattice(alg, order, &Rational::one())?;
    Ok(f.count_vectors(1) / 2)
}

/// `I ~ J` iff `J conj(I)` has a vector of reduced norm `nrd(I) nrd(J)`.
pub fn ideals_equivalent(alg: &QuaternionAlgebra, i: &RightIdeal, j: &RightIdeal) -> Result<bool> {
    let l = j.lattice.product(alg, &i.lattice.conjugate());
    let f = QuadForm::from_lattice(alg, &l, &(&i.norm * &j.norm))?;
    Ok(f.count_vectors(1) > 0)
}

fn residues(p: u64) -> impl Iterator<Item = [num_bigint::BigInt; 4]> {
    (1..p.pow(4)).map(move |mut t| {
        std::array::from_fn(|_| {
            let c = t % p;
            t /= p;
            num_bigint::BigInt::from(c)
        })
    })
}

/// The `p + 1` right ideals `J = alpha O + p I` of index `p^2` in `I`.
pub fn p_neighbors(o: &OrderLattice, ideal: &RightIdeal, p: u64) -> Result<Vec<RightIdeal>> {
    let alg = &o.algebra;
    if !is_prime(p) || alg.discriminant % p == 0 || o.level % p == 0 {
        return Err(Error::InvalidParameters(format!("{p} is not a prime coprime to DN")));
    }
    let pr = int(p as i64);
    let p_i = ideal.lattice.scale(&pr);
    let target_norm = &ideal.norm * &pr;
    let mut out: Vec<RightIdeal> = Vec::new();
    for c in residues(p) {
        let alpha = ideal.lattice.element(&c);
        let q = alg.reduced_norm(&alpha) / &ideal.norm;
        if !(q.to_integer() % num_bigint::BigInt::from(p)).is_zero() {
            continue;
        }
        let mut gens: Vec<_> = o.lattice.basis().iter().map(|b| alg.mul(&alpha, b)).collect();
        gens.extend(p_i.basis());
        let j = Lattice::from_generators(&gens)?;
        if out.iter().any(|x| x.lattice == j) {
            continue;
        }
        out.push(RightIdeal { lattice: j, norm: target_norm.clone() });
        if out.len() as u64 == p + 1 {
            break;
        }
    }
    if out.len() as u64 != p + 1 {
        return Err(Error::Construction(format!("found {} neighbors at {p}, expected {}", out.len(), p + 1)));
    }
    out.sort_by(|a, b| a.lattice.cmp(&b.lattice));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealClassSet {
    pub order: OrderLattice,
    pub representatives: Vec<RightIdeal>,
    pub unit_weights: Vec<u64>,
    pub mass: Rational,
}

impl IdealClassSet {
    pub fn class_number(&self) -> usize {
        self.representatives.len()
    }

    pub fn discriminant(&self) -> u64 {
        self.order.algebra.discriminant
    }

    pub fn level(&self) -> u64 {
        self.order.level
    }

    pub fn weight_sum(&self) -> Rational {
        self.unit_weights.iter().map(|&w| rat(1, w as i64)).sum()
    }

    /// Checks right-ideal property, norms, weights and the mass certificate.
    pub fn validate(&self) -> Result<()> {
        let alg = &self.order.algebra;
        if self.representatives.len() != self.unit_weights.len() || self.representatives.is_empty() {
            return Err(Error::Domain("class set has inconsistent lengths".into()));
        }
        for (ideal, &w) in self.representatives.iter().zip(&self.unit_weights) {
            if !ideal.is_right_ideal_of(&self.order) {
                return Err(Error::Domain("representative is not a right ideal of the order".into()));
            }
            if lattice_norm(alg, &ideal.lattice) != ideal.norm {
                return Err(Error::Domain("stored ideal norm is wrong".into()));
            }
            if lattice_unit_weight(alg, &ideal.left_order(alg))? != w {
                return Err(Error::Domain("stored unit weight is wrong".into()));
            }
        }
        let expect = eichler_mass(self.discriminant(), self.level());
        if self.mass != expect || self.weight_sum() != expect {
            return Err(Error::Domain(format!("mass certificate failed: {} vs {}", self.weight_sum(), expect)));
        }
        Ok(())
    }
}

/// Primes coprime to `DN`, in increasing order.
pub fn traversal_primes(d: u64, n: u64) -> impl Iterator<Item = u64> {
    (2u64..).filter(move |&p| is_prime(p) && gcd_u64(p, d * n) == 1)
}

/// Right-ideal classes of a definite Eichler order, by neighbor traversal
/// starting at the smallest usable prime.
pub fn ideal_class_set(o: &OrderLattice, cache: Option<&ClassSetCache>) -> Result<IdealClassSet> {
    if let Some(c) = cache {
        return c.get_or_compute(o);
    }
    let p = traversal_primes(o.algebra.discriminant, o.level).next().unwrap();
    compute_class_set(o, p)
}

/// Same as [`ideal_class_set`] with an explicit first traversal prime.
pub fn compute_class_set(o: &OrderLattice, first_prime: u64) -> Result<IdealClassSet> {
    let alg = &o.algebra;
    if !alg.is_definite() {
        return Err(Error::Domain("class sets are computed for definite algebras only".into()));
    }
    let d = alg.discriminant;
    let n = o.level;
    if gcd_u64(d, n) != 1 {
        return Err(Error::InvalidParameters(format!("level {n} is not coprime to {d}")));
    }
    let mass = eichler_mass(d, n);
    let principal = RightIdeal::principal(o);
    let mut reps = vec![principal];
    let mut weights = vec![unit_weight(o)?];
    let mut total = rat(1, weights[0] as i64);
    let mut primes = std::iter::once(first_prime).chain(traversal_primes(d, n).filter(move |&q| q != first_prime));
    while total < mass {
        let p = primes.next().unwrap();
        if p > 1000 {
            return Err(Error::Construction(format!("mass {mass} not reached by neighbor traversal")));
        }
        let mut queue = 0;
        while queue < reps.len() && total < mass {
            let current = reps[queue].clone();
            queue += 1;
            for j in p_neighbors(o, &current, p)? {
                let w = lattice_unit_weight(alg, &j.left_order(alg))?;
                let mut known = false;
                for (r, &wr) in reps.iter().zip(&weights) {
                    if wr == w && ideals_equivalent(alg, r, &j)? {
                        known = true;
                        break;
                    }
                }
                if !known {
                    total += rat(1, w as i64);
                    reps.push(j);
                    weights.push(w);
                }
            }
        }
    }
    if total != mass {
        return Err(Error::Construction(format!("class weights sum to {total}, mass is {mass}")));
    }
    let mut rest: Vec<(RightIdeal, u64)> = reps.into_iter().zip(weights).skip(1).collect();
    rest.sort_by(|a, b| a.0.lattice.cmp(&b.0.lattice));
    let mut representatives = vec![RightIdeal::principal(o)];
    let mut unit_weights = vec![unit_weight(o)?];
    for (r, w) in rest {
        representatives.push(r);
        unit_weights.push(w);
    }
    Ok(IdealClassSet { order: o.clone(), representatives, unit_weights, mass })
}

/// The lattice `I_j conj(I_i)` with form `nrd / (nrd(I_i) nrd(I_j))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenusLattice {
    pub pair: (usize, usize),
    pub lattice: Lattice,
    pub scale: Rational,
    pub form: QuadForm,
}

pub fn genus_lattice(cs: &IdealClassSet, i: usize, j: usize) -> Result<GenusLattice> {
    let alg = &cs.order.algebra;
    let ii = &cs.representatives[i];
    let jj = &cs.representatives[j];
    let lattice = jj.lattice.product(alg, &ii.lattice.conjugate());
    let scale = &ii.norm * &jj.norm;
    let form = QuadForm::from_lattice(alg, &lattice, &scale)
        .map_err(|e| Error::Construction(format!("genus lattice ({i},{j}): {e}")))?;
    Ok(GenusLattice { pair: (i, j), lattice, scale, form })
}

pub fn genus_lattices(cs: &IdealClassSet) -> Result<Vec<Vec<GenusLattice>>> {
    let h = cs.class_number();
    (0..h).map(|i| (0..h).map(|j| genus_lattice(cs, i, j)).collect()).collect()
}

/// `theta[0..=m_max]` of a single form.
pub fn theta_qexpansion(form: &QuadForm, m_max: u64) -> Vec<u64> {
    form.theta(m_max)
}

/// Genus-averaged theta coefficients `r_{D,N}(0..=m_max)`:
/// `sum_{i,j} r_ij(m) / (w_i w_j)` divided by `sum_{i,j} 1 / (w_i w_j)`.
pub fn genus_average_series(cs: &IdealClassSet, m_max: u64) -> Result<Vec<Rational>> {
    let h = cs.class_number();
    let mut acc = vec![Rational::zero(); m_max as usize + 1];
    let mut total = Rational::zero();
    for i in 0..h {
        for j in i..h {
            let gl = genus_lattice(cs, i, j)?;
            let theta = gl.form.theta(m_max);
            // r_ij = r_ji (conjugation is an isometry)
            let mult = if i == j { 1 } else { 2 };
            let wt = rat(mult, (cs.unit_weights[i] * cs.unit_weights[j]) as i64);
            for (a, &t) in acc.iter_mut().zip(&theta) {
                *a += &wt * int(t as i64);
            }
            total += wt;
        }
    }
    Ok(acc.into_iter().map(|a| a / &total).collect())
}

pub fn genus_average(cs: &IdealClassSet, m: u64) -> Result<Rational> {
    Ok(genus_average_series(cs, m)?.pop().unwrap())
}

/// `sum_{d | m, d odd} d`.
pub fn odd_divisor_sum(m: u64) -> u64 {
    (1..=m).filter(|d| d.is_odd() && m % d == 0).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_values() {
        assert_eq!(eichler_mass(2, 1), rat(1, 12));
        assert_eq!(eichler_mass(3, 1), rat(1, 6));
        assert_eq!(eichler_mass(2, 3), rat(1, 3));
        assert_eq!(eichler_mass(30, 1), rat(2, 3));
    }

    #[test]
    fn hurwitz_class_set() {
        let o = standard_eichler_order(2, 1).unwrap();
        assert_eq!(unit_weight(&o).unwrap(), 12);
        let cs = ideal_class_set(&o, None).unwrap();
        assert_eq!(cs.class_number(), 1);
        cs.validate().unwrap();
        let f = QuadForm::from_lattice(&o.algebra, &o.lattice, &Rational::one()).unwrap();
        assert_eq!(theta_qexpansion(&f, 3), vec![1, 24, 24, 96]);
        let nb = p_neighbors(&o, &cs.representatives[0], 3).unwrap();
        assert_eq!(nb.len(), 4);
        for j in &nb {
            assert_eq!(j.norm, int(3));
            assert!(ideals_equivalent(&o.algebra, &cs.representatives[0], j).unwrap());
        }
        assert!(p_neighbors(&o, &cs.representatives[0], 2).is_err());
    }
}
