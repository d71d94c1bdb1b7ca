//! Line-oriented text format for categories, functor blocks and lifting
//! problems. Every line is one JSON record; scalars are strings so the
//! arithmetic stays exact ("-3", "2/3", residues over a prime field).
//! `emit` is canonical: sorted keys, ascending degrees, zero entries
//! dropped, so identical inputs give byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complexes::Complex;
use crate::dgcat::{CompTable, DgCategory, DgFunctor};
use crate::error::{Error, Result};
use crate::exactlin::{Field, Matrix, Scalar};
use crate::obstruct::{GenSpec, LiftingProblem};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case", deny_unknown_fields)]
enum Record {
    Manifest {
        version: u32,
        field: String,
    },
    Object {
        name: String,
    },
    Hom {
        source: String,
        target: String,
        degree: i64,
        labels: Vec<String>,
    },
    Diff {
        source: String,
        target: String,
        degree: i64,
        from: String,
        to: String,
        scalar: String,
    },
    Comp {
        x: String,
        y: String,
        z: String,
        gdeg: i64,
        g: String,
        fdeg: i64,
        f: String,
        result: Vec<(String, String)>,
    },
    Id {
        object: String,
        value: Vec<(String, String)>,
    },
    Functor {},
    FunctorObject {
        index: usize,
        image: usize,
    },
    FunctorMap {
        x: usize,
        y: usize,
        degree: i64,
        rows: Vec<Vec<String>>,
    },
    Gen {
        name: String,
        source: String,
        target: String,
        degree: i64,
        diff: Vec<(String, Vec<String>)>,
    },
    ProblemObject {
        name: String,
        image: String,
    },
    F0 {
        gen: String,
        coords: Vec<String>,
    },
}

/// A functor block kept in its raw serialized shape: parse and emit
/// round-trip it without needing the second category in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestFunctor {
    pub object_map: Vec<(usize, usize)>,
    pub maps: BTreeMap<(usize, usize, i64), Vec<Vec<String>>>,
}

/// A lifting-problem block, resolved against the file's category.
pub struct ProblemSpec {
    pub objects: Vec<String>,
    pub gens: Vec<GenSpec>,
    pub object_map: Vec<usize>,
    pub f0: BTreeMap<usize, Vec<Scalar>>,
}

pub struct ParsedManifest {
    pub category: Arc<DgCategory>,
    pub functors: Vec<ManifestFunctor>,
    pub problem: Option<ProblemSpec>,
}

impl ParsedManifest {
    pub fn lifting_problem(&self) -> Result<LiftingProblem> {
        let p = self.problem.as_ref().ok_or_else(|| Error::Parse {
            line: 0,
            msg: "no lifting-problem block in this file".into(),
        })?;
        LiftingProblem::new(
            self.category.clone(),
            p.objects.clone(),
            p.gens.clone(),
            p.object_map.clone(),
            p.f0.clone(),
        )
    }
}

fn field_name(field: Field) -> String {
    match field {
        Field::Rationals => "Q".into(),
        Field::Prime(p) => format!("F{p}"),
    }
}

fn parse_field(s: &str, line: usize) -> Result<Field> {
    if s == "Q" {
        return Ok(Field::Rationals);
    }
    if let Some(p) = s.strip_prefix('F') {
        if let Ok(p) = p.parse::<u64>() {
            return Field::prime(p);
        }
    }
    Err(Error::Parse {
        line,
        msg: format!("unknown field descriptor {s:?}"),
    })
}

pub fn parse_file(path: &Path) -> Result<ParsedManifest> {
    parse_str(&std::fs::read_to_string(path)?)
}

pub fn parse_str(text: &str) -> Result<ParsedManifest> {
    let mut records: Vec<(usize, Record)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let rec: Record = serde_json::from_str(raw).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        records.push((line, rec));
    }
    let (first_line, version, field) = match records.first() {
        Some((l, Record::Manifest { version, field })) => (*l, *version, field.clone()),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "file must start with a manifest record".into(),
            })
        }
    };
    if version != FORMAT_VERSION {
        return Err(Error::Parse {
            line: first_line,
            msg: format!("unsupported format version {version}"),
        });
    }
    let field = parse_field(&field, first_line)?;

    let mut objects: Vec<String> = Vec::new();
    let mut hom_degrees: BTreeMap<(usize, usize), BTreeMap<i64, Vec<String>>> = BTreeMap::new();
    let mut diffs: Vec<(usize, usize, usize, i64, String, String, Scalar)> = Vec::new();
    let mut comps: Vec<(usize, (usize, usize, usize), (i64, String), (i64, String), Vec<(String, Scalar)>)> =
        Vec::new();
    let mut id_records: Vec<(usize, usize, Vec<(String, Scalar)>)> = Vec::new();
    let mut functors: Vec<ManifestFunctor> = Vec::new();
    let mut p_objects: Vec<String> = Vec::new();
    let mut p_images: Vec<(usize, String)> = Vec::new();
    let mut p_gens: Vec<(usize, String, String, String, i64, Vec<(Scalar, Vec<String>)>)> = Vec::new();
    let mut p_f0: Vec<(usize, String, Vec<Scalar>)> = Vec::new();

    let obj_index = |objects: &Vec<String>, name: &str, line: usize| -> Result<usize> {
        objects.iter().position(|o| o == name).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unknown object {name:?}"),
        })
    };
    let scalar = |s: &str, line: usize| -> Result<Scalar> {
        field.parse_scalar(s).map_err(|_| Error::Parse {
            line,
            msg: format!("bad scalar {s:?}"),
        })
    };

    for (line, rec) in records.into_iter().skip(1) {
        match rec {
            Record::Manifest { .. } => {
                return Err(Error::Parse {
                    line,
                    msg: "duplicate manifest record".into(),
                })
            }
            Record::Object { name } => {
                if objects.contains(&name) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("duplicate object {name:?}"),
                    });
                }
                objects.push(name);
            }
            Record::Hom {
                source,
                target,
                degree,
                labels,
            } => {
                let x = obj_index(&objects, &source, line)?;
                let y = obj_index(&objects, &target, line)?;
                let slot = hom_degrees.entry((x, y)).or_default();
                if slot.insert(degree, labels).is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("duplicate hom record for {source:?}→{target:?} degree {degree}"),
                    });
                }
            }
            Record::Diff {
                source,
                target,
                degree,
                from,
                to,
                scalar: s,
            } => {
                let x = obj_index(&objects, &source, line)?;
                let y = obj_index(&objects, &target, line)?;
                diffs.push((line, x, y, degree, from, to, scalar(&s, line)?));
            }
            Record::Comp {
                x,
                y,
                z,
                gdeg,
                g,
                fdeg,
                f,
                result,
            } => {
                let xi = obj_index(&objects, &x, line)?;
                let yi = obj_index(&objects, &y, line)?;
                let zi = obj_index(&objects, &z, line)?;
                let mut out = Vec::new();
                for (label, s) in result {
                    out.push((label, scalar(&s, line)?));
                }
                comps.push((line, (xi, yi, zi), (gdeg, g), (fdeg, f), out));
            }
            Record::Id { object, value } => {
                let x = obj_index(&objects, &object, line)?;
                let mut out = Vec::new();
                for (label, s) in value {
                    out.push((label, scalar(&s, line)?));
                }
                id_records.push((line, x, out));
            }
            Record::Functor {} => functors.push(ManifestFunctor {
                object_map: Vec::new(),
                maps: BTreeMap::new(),
            }),
            Record::FunctorObject { index, image } => {
                let f = functors.last_mut().ok_or_else(|| Error::Parse {
                    line,
                    msg: "functor_object outside a functor block".into(),
                })?;
                f.object_map.push((index, image));
            }
            Record::FunctorMap { x, y, degree, rows } => {
                let f = functors.last_mut().ok_or_else(|| Error::Parse {
                    line,
                    msg: "functor_map outside a functor block".into(),
                })?;
                f.maps.insert((x, y, degree), rows);
            }
            Record::Gen {
                name,
                source,
                target,
                degree,
                diff,
            } => {
                let mut terms = Vec::new();
                for (s, word) in diff {
                    terms.push((scalar(&s, line)?, word));
                }
                p_gens.push((line, name, source, target, degree, terms));
            }
            Record::ProblemObject { name, image } => {
                if p_objects.contains(&name) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("duplicate problem object {name:?}"),
                    });
                }
                p_objects.push(name);
                p_images.push((line, image));
            }
            Record::F0 { gen, coords } => {
                let mut out = Vec::new();
                for s in coords {
                    out.push(scalar(&s, line)?);
                }
                p_f0.push((line, gen, out));
            }
        }
    }

    let nobj = objects.len();
    let label_index = |hom: &Complex, deg: i64, label: &str, line: usize| -> Result<usize> {
        hom.labels(deg)
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("unknown basis label {label:?} at degree {deg}"),
            })
    };
    let mut homs = Vec::new();
    for x in 0..nobj {
        for y in 0..nobj {
            let Some(degs) = hom_degrees.get(&(x, y)) else {
                homs.push(Complex::zero(field));
                continue;
            };
            let lo = *degs.keys().next().unwrap();
            let hi = *degs.keys().last().unwrap();
            let mut dims = Vec::new();
            let mut labels = Vec::new();
            for deg in lo..=hi {
                let ls = degs.get(&deg).cloned().unwrap_or_default();
                dims.push(ls.len());
                labels.push(ls);
            }
            let mut mats: Vec<Matrix> = (lo..=hi)
                .map(|deg| {
                    let below = if deg == lo {
                        0
                    } else {
                        dims[(deg - lo - 1) as usize]
                    };
                    Matrix::zero(field, below, dims[(deg - lo) as usize])
                })
                .collect();
            for (line, dx, dy, deg, from, to, s) in &diffs {
                if (*dx, *dy) != (x, y) {
                    continue;
                }
                if *deg <= lo || *deg > hi {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("differential at degree {deg} outside hom support"),
                    });
                }
                let col = labels[(*deg - lo) as usize]
                    .iter()
                    .position(|l| l == from)
                    .ok_or_else(|| Error::Parse {
                        line: *line,
                        msg: format!("unknown basis label {from:?} at degree {deg}"),
                    })?;
                let row = labels[(*deg - lo - 1) as usize]
                    .iter()
                    .position(|l| l == to)
                    .ok_or_else(|| Error::Parse {
                        line: *line,
                        msg: format!("unknown basis label {to:?} at degree {}", deg - 1),
                    })?;
                mats[(*deg - lo) as usize].set(row, col, s.clone());
            }
            homs.push(
                Complex::new(field, lo, dims, labels, mats).map_err(|e| Error::Parse {
                    line: 0,
                    msg: format!("hom {}→{}: {e}", objects[x], objects[y]),
                })?,
            );
        }
    }
    let mut comp: BTreeMap<(usize, usize, usize), CompTable> = BTreeMap::new();
    for (line, (x, y, z), (gdeg, g), (fdeg, f), out) in comps {
        let gh = &homs[y * nobj + z];
        let fh = &homs[x * nobj + y];
        let oh = &homs[x * nobj + z];
        let gi = label_index(gh, gdeg, &g, line)?;
        let fi = label_index(fh, fdeg, &f, line)?;
        let mut entry = Vec::new();
        for (label, s) in out {
            let oi = label_index(oh, gdeg + fdeg, &label, line)?;
            if !s.is_zero() {
                entry.push((oi, s));
            }
        }
        comp.entry((x, y, z))
            .or_default()
            .insert(((gdeg, gi), (fdeg, fi)), entry);
    }
    let mut ids = vec![None; nobj];
    for (line, x, value) in id_records {
        let h = &homs[x * nobj + x];
        let mut coords = vec![field.zero(); h.dim(0)];
        for (label, s) in value {
            let i = label_index(h, 0, &label, line)?;
            coords[i] = s;
        }
        if ids[x].replace(coords).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate identity for object {:?}", objects[x]),
            });
        }
    }
    let mut id_vecs = Vec::new();
    for (x, slot) in ids.into_iter().enumerate() {
        id_vecs.push(slot.ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("no identity record for object {:?}", objects[x]),
        })?);
    }
    let category = DgCategory::new(field, objects, homs, comp, id_vecs)?;
    let report = category.validate();
    if !report.is_valid() {
        return Err(Error::InvalidCategory(report.violations.join("; ")));
    }
    let category = Arc::new(category);

    let problem = if p_objects.is_empty() && p_gens.is_empty() && p_f0.is_empty() {
        None
    } else {
        let mut object_map = Vec::new();
        for (line, image) in &p_images {
            object_map.push(
                category
                    .objects
                    .iter()
                    .position(|o| o == image)
                    .ok_or_else(|| Error::Parse {
                        line: *line,
                        msg: format!("unknown target object {image:?}"),
                    })?,
            );
        }
        let gen_names: Vec<String> = p_gens.iter().map(|g| g.1.clone()).collect();
        let mut gens = Vec::new();
        for (line, name, source, target, degree, terms) in &p_gens {
            let find_obj = |n: &str| {
                p_objects.iter().position(|o| o == n).ok_or_else(|| Error::Parse {
                    line: *line,
                    msg: format!("unknown problem object {n:?}"),
                })
            };
            let mut diff = Vec::new();
            for (s, word) in terms {
                let mut ixs = Vec::new();
                for w in word {
                    ixs.push(gen_names.iter().position(|g| g == w).ok_or_else(|| {
                        Error::Parse {
                            line: *line,
                            msg: format!("unknown generator {w:?} in d({name})"),
                        }
                    })?);
                }
                diff.push((s.clone(), ixs));
            }
            gens.push(GenSpec {
                source: find_obj(source)?,
                target: find_obj(target)?,
                degree: *degree,
                label: name.clone(),
                diff,
            });
        }
        let mut f0 = BTreeMap::new();
        for (line, gen, coords) in p_f0 {
            let j = gen_names.iter().position(|g| *g == gen).ok_or_else(|| Error::Parse {
                line,
                msg: format!("f0 value for unknown generator {gen:?}"),
            })?;
            f0.insert(j, coords);
        }
        Some(ProblemSpec {
            objects: p_objects,
            gens,
            object_map,
            f0,
        })
    };
    Ok(ParsedManifest {
        category,
        functors,
        problem,
    })
}

fn push(out: &mut String, rec: &Record) {
    out.push_str(&serde_json::to_string(rec).expect("record serialization"));
    out.push('\n');
}

/// Deterministic per-pair labels: the complex's own labels when they are
/// unique within each degree, otherwise suffixed with their index.
fn canonical_labels(h: &Complex, deg: i64) -> Vec<String> {
    let raw = h.labels(deg);
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for l in raw {
        *seen.entry(l.as_str()).or_default() += 1;
    }
    raw.iter()
        .enumerate()
        .map(|(i, l)| {
            if seen[l.as_str()] > 1 {
                format!("{l}~{i}")
            } else {
                l.clone()
            }
        })
        .collect()
}

pub fn emit(cat: &DgCategory, functors: &[ManifestFunctor], problem: Option<&ProblemSpec>) -> String {
    let field = cat.field;
    let n = cat.nobj();
    let mut out = String::new();
    push(
        &mut out,
        &Record::Manifest {
            version: FORMAT_VERSION,
            field: field_name(field),
        },
    );
    for name in &cat.objects {
        push(&mut out, &Record::Object { name: name.clone() });
    }
    let labels_of = |x: usize, y: usize, deg: i64| canonical_labels(cat.hom(x, y), deg);
    for (x, y) in cat.pairs() {
        let h = cat.hom(x, y);
        if h.is_zero_complex() {
            continue;
        }
        for deg in h.support() {
            if h.dim(deg) == 0 {
                continue;
            }
            push(
                &mut out,
                &Record::Hom {
                    source: cat.objects[x].clone(),
                    target: cat.objects[y].clone(),
                    degree: deg,
                    labels: labels_of(x, y, deg),
                },
            );
        }
        for deg in h.support() {
            let d = h.d(deg);
            let cols = labels_of(x, y, deg);
            let rows = labels_of(x, y, deg - 1);
            for c in 0..d.cols {
                for r in 0..d.rows {
                    let s = d.get(r, c);
                    if s.is_zero() {
                        continue;
                    }
                    push(
                        &mut out,
                        &Record::Diff {
                            source: cat.objects[x].clone(),
                            target: cat.objects[y].clone(),
                            degree: deg,
                            from: cols[c].clone(),
                            to: rows[r].clone(),
                            scalar: field.format_scalar(s),
                        },
                    );
                }
            }
        }
    }
    for ((x, y, z), table) in cat.comp_tables() {
        for (((gdeg, gi), (fdeg, fi)), entry) in table {
            let result: Vec<(String, String)> = entry
                .iter()
                .filter(|(_, s)| !s.is_zero())
                .map(|(oi, s)| {
                    (
                        labels_of(*x, *z, gdeg + fdeg)[*oi].clone(),
                        field.format_scalar(s),
                    )
                })
                .collect();
            if result.is_empty() {
                continue;
            }
            push(
                &mut out,
                &Record::Comp {
                    x: cat.objects[*x].clone(),
                    y: cat.objects[*y].clone(),
                    z: cat.objects[*z].clone(),
                    gdeg: *gdeg,
                    g: labels_of(*y, *z, *gdeg)[*gi].clone(),
                    fdeg: *fdeg,
                    f: labels_of(*x, *y, *fdeg)[*fi].clone(),
                    result,
                },
            );
        }
    }
    for x in 0..n {
        let value: Vec<(String, String)> = cat
            .id(x)
            .coords
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(i, s)| (labels_of(x, x, 0)[i].clone(), field.format_scalar(s)))
            .collect();
        push(
            &mut out,
            &Record::Id {
                object: cat.objects[x].clone(),
                value,
            },
        );
    }
    for f in functors {
        push(&mut out, &Record::Functor {});
        for (index, image) in &f.object_map {
            push(
                &mut out,
                &Record::FunctorObject {
                    index: *index,
                    image: *image,
                },
            );
        }
        for ((x, y, degree), rows) in &f.maps {
            push(
                &mut out,
                &Record::FunctorMap {
                    x: *x,
                    y: *y,
                    degree: *degree,
                    rows: rows.clone(),
                },
            );
        }
    }
    if let Some(p) = problem {
        for (i, name) in p.objects.iter().enumerate() {
            push(
                &mut out,
                &Record::ProblemObject {
                    name: name.clone(),
                    image: cat.objects[p.object_map[i]].clone(),
                },
            );
        }
        for g in &p.gens {
            push(
                &mut out,
                &Record::Gen {
                    name: g.label.clone(),
                    source: p.objects[g.source].clone(),
                    target: p.objects[g.target].clone(),
                    degree: g.degree,
                    diff: g
                        .diff
                        .iter()
                        .map(|(s, word)| {
                            (
                                field.format_scalar(s),
                                word.iter().map(|j| p.gens[*j].label.clone()).collect(),
                            )
                        })
                        .collect(),
                },
            );
        }
        for (j, coords) in &p.f0 {
            push(
                &mut out,
                &Record::F0 {
                    gen: p.gens[*j].label.clone(),
                    coords: coords.iter().map(|s| field.format_scalar(s)).collect(),
                },
            );
        }
    }
    out
}

/// Snapshot a lifting problem's source data for emission.
pub fn problem_spec(p: &LiftingProblem) -> ProblemSpec {
    ProblemSpec {
        objects: p.semifree.objects.clone(),
        gens: p.semifree.gens.clone(),
        object_map: p.object_map.clone(),
        f0: p.f0.clone(),
    }
}

/// Snapshot a dg functor as a raw block (object map plus per-pair
/// matrices over the source's support, empty shapes skipped).
pub fn functor_block(f: &DgFunctor) -> ManifestFunctor {
    let field = f.source.field;
    let mut maps = BTreeMap::new();
    for (x, y) in f.source.pairs() {
        for deg in f.source.hom(x, y).support() {
            let m = f.map(x, y).f(deg);
            if m.rows == 0 && m.cols == 0 {
                continue;
            }
            let rows: Vec<Vec<String>> = (0..m.rows)
                .map(|r| (0..m.cols).map(|c| field.format_scalar(m.get(r, c))).collect())
                .collect();
            maps.insert((x, y, deg), rows);
        }
    }
    ManifestFunctor {
        object_map: f.object_map.iter().copied().enumerate().collect(),
        maps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{cell_category, CellKind};

    #[test]
    fn round_trip_cell_categories() {
        for (kind, m) in [
            (CellKind::Sphere, 0),
            (CellKind::Sphere, 2),
            (CellKind::Disk, 1),
            (CellKind::Disk, 3),
        ] {
            let cat = cell_category(Field::Rationals, kind, m).unwrap();
            let text = emit(&cat, &[], None);
            let parsed = parse_str(&text).unwrap();
            assert_eq!(*parsed.category, *cat);
            assert_eq!(emit(&parsed.category, &[], None), text);
        }
    }

    #[test]
    fn round_trip_problem_and_functor() {
        let field = Field::Prime(2);
        let cat = cell_category(field, CellKind::Sphere, 1).unwrap();
        let problem = ProblemSpec {
            objects: vec!["u".into(), "v".into()],
            gens: vec![
                GenSpec {
                    source: 0,
                    target: 1,
                    degree: 1,
                    label: "h".into(),
                    diff: vec![],
                },
                GenSpec {
                    source: 0,
                    target: 1,
                    degree: 2,
                    label: "q".into(),
                    diff: vec![(field.one(), vec![0])],
                },
            ],
            object_map: vec![0, 1],
            f0: BTreeMap::new(),
        };
        let (_, incl) = crate::dgcat::h0(&cat).map(|(h, f)| (h, f)).unwrap();
        let block = functor_block(&incl);
        let text = emit(&cat, &[block.clone()], Some(&problem));
        let parsed = parse_str(&text).unwrap();
        assert_eq!(*parsed.category, *cat);
        assert_eq!(parsed.functors, vec![block]);
        let p = parsed.problem.as_ref().unwrap();
        assert_eq!(p.objects, problem.objects);
        assert_eq!(p.gens.len(), 2);
        assert_eq!(p.gens[1].diff, problem.gens[1].diff);
        assert_eq!(
            emit(&parsed.category, &parsed.functors, parsed.problem.as_ref()),
            text
        );
        parsed.lifting_problem().unwrap();
    }

    fn corrupt_diff_line(text: &str, key: &str, replacement: &str) -> String {
        let mut done = false;
        text.lines()
            .map(|l| {
                if !done && l.contains("\"record\":\"diff\"") {
                    done = true;
                    let pat = format!("\"{key}\":\"");
                    let start = l.find(&pat).unwrap() + pat.len();
                    let end = start + l[start..].find('"').unwrap();
                    format!("{}{}{}\n", &l[..start], replacement, &l[end..])
                } else {
                    format!("{l}\n")
                }
            })
            .collect()
    }

    #[test]
    fn dangling_label_is_named() {
        let cat = cell_category(Field::Rationals, CellKind::Disk, 1).unwrap();
        let text = emit(&cat, &[], None);
        assert!(text.contains("\"record\":\"diff\""));
        let bad = corrupt_diff_line(&text, "to", "nope");
        match parse_str(&bad) {
            Err(Error::Parse { line, msg }) => {
                assert!(line > 0);
                assert!(msg.contains("nope"), "{msg}");
            }
            other => panic!("expected a parse error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn bad_scalar_is_reported() {
        let cat = cell_category(Field::Rationals, CellKind::Disk, 1).unwrap();
        let text = emit(&cat, &[], None);
        let bad = corrupt_diff_line(&text, "scalar", "one");
        assert!(matches!(parse_str(&bad), Err(Error::Parse { .. })));
    }
}
