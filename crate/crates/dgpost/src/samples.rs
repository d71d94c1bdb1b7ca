//! Seeded random instances and hand-built fixtures for the property and
//! acceptance suites: random positively graded categories via iterated
//! cell attachment, random 𝔽₂ lifting problems, and a family of
//! hand-constructed problems whose obstruction provably does not vanish
//! (a triple-product class that survives every choice of bounding chain).

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cells::{attach_cells, CellSpec};
use crate::complexes::Complex;
use crate::dgcat::{CompTable, DgCategory};
use crate::exactlin::{vec_add, vec_scale, Field, Matrix, Scalar};
use crate::obstruct::{discrete, GenSpec, LiftingProblem};

#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub max_objects: usize,
    pub max_cells: usize,
    pub cap: i64,
    /// attachment stops early once any hom degree reaches this dimension
    pub max_dim_per_degree: usize,
}

impl Default for SuiteParams {
    fn default() -> SuiteParams {
        SuiteParams {
            max_objects: 3,
            max_cells: 4,
            cap: 5,
            max_dim_per_degree: 3,
        }
    }
}

fn random_scalar(rng: &mut ChaCha8Rng, field: Field, nonzero: bool) -> Scalar {
    match field {
        Field::Rationals => {
            let mut n = rng.gen_range(-2i64..=2);
            if nonzero && n == 0 {
                n = 1;
            }
            field.from_integer(n)
        }
        Field::Prime(p) => {
            let lo = if nonzero { 1 } else { 0 };
            field.from_integer(rng.gen_range(lo..p as i64))
        }
    }
}

fn too_big(cat: &DgCategory, limit: usize) -> bool {
    cat.pairs().any(|(x, y)| {
        let h = cat.hom(x, y);
        h.support().any(|deg| h.dim(deg) > limit)
    })
}

/// A random positively graded dg category: start from a discrete category
/// and attach cells one at a time, each along a random cycle of the
/// current stage (so validity is automatic), truncating at `cap`.
pub fn random_category(rng: &mut ChaCha8Rng, field: Field, p: &SuiteParams) -> Arc<DgCategory> {
    let nobj = rng.gen_range(1..=p.max_objects);
    let objects: Vec<String> = (0..nobj).map(|i| format!("x{i}")).collect();
    let mut cat = discrete(field, &objects).expect("discrete base");
    let ncells = rng.gen_range(1..=p.max_cells);
    for c in 0..ncells {
        if too_big(&cat, p.max_dim_per_degree) {
            break;
        }
        let mut m = rng.gen_range(-1i64..=2);
        let (source, target) = if m == -1 && nobj >= 2 {
            // keep the degree-0 generator graph acyclic
            let s = rng.gen_range(0..nobj - 1);
            (s, rng.gen_range(s + 1..nobj))
        } else {
            if m == -1 {
                m = rng.gen_range(0..=2);
            }
            (rng.gen_range(0..nobj), rng.gen_range(0..nobj))
        };
        let cycle = if m < 0 {
            Vec::new()
        } else {
            let h = cat.hom(source, target);
            let kernel = h.d(m).kernel_basis();
            let mut z = vec![field.zero(); h.dim(m)];
            for k in kernel {
                let s = random_scalar(rng, field, false);
                z = vec_add(field, &z, &vec_scale(field, &s, &k));
            }
            z
        };
        let cell = CellSpec {
            m,
            source,
            target,
            cycle,
            label: format!("c{c}"),
        };
        match attach_cells(&cat, vec![cell], p.cap) {
            Ok(ext) => cat = ext.total,
            Err(_) => continue,
        }
    }
    cat
}

/// A deterministic suite cycling through the given fields.
pub fn suite(seed: u64, count: usize, fields: &[Field], p: &SuiteParams) -> Vec<Arc<DgCategory>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| random_category(&mut rng, fields[i % fields.len()], p))
        .collect()
}

/// A random lifting problem over 𝔽₂ with at most two generators and a
/// small fiber search space, as the oracle-agreement suite needs.
pub fn random_lifting_problem(rng: &mut ChaCha8Rng) -> LiftingProblem {
    let field = Field::Prime(2);
    loop {
        let params = SuiteParams {
            max_objects: 2,
            max_cells: 3,
            cap: 3,
            max_dim_per_degree: 2,
        };
        let a = random_category(rng, field, &params);
        let nobj = a.nobj();
        let objects: Vec<String> = vec!["b0".into(), "b1".into()];
        let object_map = vec![rng.gen_range(0..nobj), rng.gen_range(0..nobj)];
        let mut gens = vec![GenSpec {
            source: 0,
            target: 1,
            degree: 0,
            label: "g".into(),
            diff: vec![],
        }];
        let shape = rng.gen_range(0..4u32);
        let second_bounds_first = shape == 2;
        match shape {
            0 => {}
            1 => gens.push(GenSpec {
                source: 0,
                target: 1,
                degree: 1,
                label: "h".into(),
                diff: vec![],
            }),
            2 => gens.push(GenSpec {
                source: 0,
                target: 1,
                degree: 1,
                label: "h".into(),
                diff: vec![(field.one(), vec![0])],
            }),
            _ => gens.push(GenSpec {
                source: 0,
                target: 1,
                degree: 2,
                label: "h".into(),
                diff: vec![],
            }),
        }
        let (sz, _) = match crate::postnikov::stage(&a, 0) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let h0_dim = sz.hom(object_map[0], object_map[1]).dim(0);
        let coords = if second_bounds_first {
            vec![field.zero(); h0_dim]
        } else {
            (0..h0_dim).map(|_| random_scalar(rng, field, false)).collect()
        };
        let mut f0 = BTreeMap::new();
        f0.insert(0usize, coords);
        match LiftingProblem::new(a, objects, gens, object_map, f0) {
            Ok(p) => return p,
            Err(_) => continue,
        }
    }
}

/// The obstructed triple-product target: a chain of four objects whose
/// two adjacent products are killed by bounding chains, so the product of
/// the bounding chains carries a homology class in degree 1 that no
/// strictification can avoid. `perm` places the four chain objects at the
/// given physical indices; `extra_object` appends an idle object;
/// `double_q` demands two independent strictifications at once.
fn obstructed_target(field: Field, perm: [usize; 4], extra_object: bool) -> Arc<DgCategory> {
    let one = field.one();
    let n = 4 + usize::from(extra_object);
    let line = |l: &str| Complex::line(field, 0, l);
    let two = |l0: &str, l1: &str| {
        Complex::new(
            field,
            0,
            vec![1, 1],
            vec![vec![l0.into()], vec![l1.into()]],
            vec![Matrix::zero(field, 0, 1), Matrix::from_ints(field, &[&[1]])],
        )
        .unwrap()
    };
    let h14 = Complex::new(
        field,
        0,
        vec![1, 2],
        vec![vec!["w".into()], vec!["cs".into(), "ta".into()]],
        vec![Matrix::zero(field, 0, 1), Matrix::from_ints(field, &[&[1, 1]])],
    )
    .unwrap();
    let mut homs = vec![Complex::zero(field); n * n];
    let mut objects = vec![String::new(); n];
    for (logical, phys) in perm.iter().enumerate() {
        objects[*phys] = format!("x{}", logical + 1);
    }
    if extra_object {
        objects[4] = "x5".into();
    }
    for x in 0..n {
        homs[x * n + x] = line("id");
    }
    let at = |l: usize| perm[l];
    homs[at(0) * n + at(1)] = line("a");
    homs[at(1) * n + at(2)] = line("b");
    homs[at(2) * n + at(3)] = line("c");
    homs[at(0) * n + at(2)] = two("ba", "s");
    homs[at(1) * n + at(3)] = two("cb", "t");
    homs[at(0) * n + at(3)] = h14;
    let mut comp: BTreeMap<(usize, usize, usize), CompTable> = BTreeMap::new();
    let mut ins = |key: (usize, usize, usize), gk: (i64, usize), fk: (i64, usize), out: usize| {
        comp.entry(key)
            .or_default()
            .insert((gk, fk), vec![(out, one.clone())]);
    };
    for x in 0..n {
        for y in 0..n {
            let h = homs[x * n + y].clone();
            for deg in h.support() {
                for i in 0..h.dim(deg) {
                    ins((x, y, y), (0, 0), (deg, i), i);
                    ins((x, x, y), (deg, i), (0, 0), i);
                }
            }
        }
    }
    ins((at(0), at(1), at(2)), (0, 0), (0, 0), 0); // b∘a = ba
    ins((at(1), at(2), at(3)), (0, 0), (0, 0), 0); // c∘b = cb
    ins((at(0), at(2), at(3)), (0, 0), (0, 0), 0); // c∘ba = w
    ins((at(0), at(2), at(3)), (0, 0), (1, 0), 0); // c∘s = cs
    ins((at(0), at(1), at(3)), (0, 0), (0, 0), 0); // cb∘a = w
    ins((at(0), at(1), at(3)), (1, 0), (0, 0), 1); // t∘a = ta
    let ids = vec![vec![one.clone()]; n];
    let cat = DgCategory::new(field, objects, homs, comp, ids).unwrap();
    debug_assert!(cat.validate().is_valid());
    Arc::new(cat)
}

/// Hand-constructed non-vanishing lifting problems over the given field;
/// `variant` selects among five structurally different presentations of
/// the obstructed triple product. The obstruction at stage 0 never
/// vanishes and no stage-1 lift exists.
pub fn obstructed_problem(field: Field, variant: usize) -> LiftingProblem {
    let (perm, extra, double_q) = match variant % 5 {
        0 => ([0, 1, 2, 3], false, false),
        1 => ([0, 1, 2, 3], true, false),
        2 => ([3, 2, 1, 0], false, false),
        3 => ([0, 1, 2, 3], false, true),
        _ => ([1, 3, 0, 2], true, false),
    };
    let a = obstructed_target(field, perm, extra);
    let one = field.one();
    let mut gens = vec![
        GenSpec {
            source: 0,
            target: 1,
            degree: 0,
            label: "a".into(),
            diff: vec![],
        },
        GenSpec {
            source: 1,
            target: 2,
            degree: 0,
            label: "b".into(),
            diff: vec![],
        },
        GenSpec {
            source: 2,
            target: 3,
            degree: 0,
            label: "c".into(),
            diff: vec![],
        },
        GenSpec {
            source: 0,
            target: 2,
            degree: 1,
            label: "s".into(),
            diff: vec![(one.clone(), vec![0, 1])],
        },
        GenSpec {
            source: 1,
            target: 3,
            degree: 1,
            label: "t".into(),
            diff: vec![(one.clone(), vec![1, 2])],
        },
        GenSpec {
            source: 0,
            target: 3,
            degree: 2,
            label: "q".into(),
            diff: vec![(one.clone(), vec![3, 2]), (field.neg(&one), vec![0, 4])],
        },
    ];
    if double_q {
        gens.push(GenSpec {
            source: 0,
            target: 3,
            degree: 2,
            label: "q2".into(),
            diff: vec![(one.clone(), vec![3, 2]), (field.neg(&one), vec![0, 4])],
        });
    }
    let objects: Vec<String> = (1..=4).map(|i| format!("o{i}")).collect();
    let object_map = perm.to_vec();
    let mut f0 = BTreeMap::new();
    for j in 0..3usize {
        f0.insert(j, vec![field.one()]);
    }
    LiftingProblem::new(a, objects, gens, object_map, f0).expect("obstructed fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstruct::{obstruction_class, VanishingVerdict};

    #[test]
    fn random_categories_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (i, field) in [Field::Rationals, Field::Prime(2), Field::Prime(5)]
            .into_iter()
            .cycle()
            .take(12)
            .enumerate()
        {
            let _ = i;
            let cat = random_category(&mut rng, field, &SuiteParams::default());
            assert!(cat.validate().is_valid());
            assert!(cat.is_positively_graded());
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let p = SuiteParams::default();
        let a = suite(7, 5, &[Field::Prime(2)], &p);
        let b = suite(7, 5, &[Field::Prime(2)], &p);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(**x, **y);
        }
    }

    #[test]
    fn random_problems_build() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = random_lifting_problem(&mut rng);
            assert!(p.f0_functor.validate().is_valid());
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]

        #[test]
        fn prop_random_categories_valid(seed in 0u64..(1 << 48)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for field in [Field::Rationals, Field::Prime(3)] {
                let cat = random_category(&mut rng, field, &SuiteParams::default());
                proptest::prop_assert!(cat.validate().is_valid());
                proptest::prop_assert!(cat.is_positively_graded());
            }
        }

        #[test]
        fn prop_serialization_round_trips(seed in 0u64..(1 << 48)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cat = random_category(&mut rng, Field::Prime(5), &SuiteParams::default());
            let text = crate::manifest::emit(&cat, &[], None);
            let parsed = crate::manifest::parse_str(&text).unwrap();
            proptest::prop_assert_eq!(crate::manifest::emit(&parsed.category, &[], None), text);
        }
    }

    #[test]
    fn obstructed_variants_do_not_vanish() {
        for v in 0..5 {
            let p = obstructed_problem(Field::Prime(2), v);
            let oc = obstruction_class(&p, 0, &p.f0_functor, 0).unwrap();
            assert_eq!(oc.verdict, VanishingVerdict::DoesNotVanish, "variant {v}");
        }
    }
}
