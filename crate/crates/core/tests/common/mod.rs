//! Random corpora and brute-force oracles shared by the integration tests.
//! Nothing here calls into the library's mining or summing code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rsos_core::taxonomy::{Itemset, Taxonomy};
use rsos_core::transactions::{load_periods, Granularity, PeriodSequence};
use rsos_core::vision::{FeatureKind, GrayImage, HaarFeature, Placement};

pub type Pair = (String, String);
pub type Set = Vec<Pair>;
/// `(reference, nodes with supports, relation names)`
pub type HigenRow = (Set, Vec<(Set, usize)>, Vec<&'static str>);

/// A random history over up to three attributes with optional two-level
/// hierarchies.
#[derive(Debug, Clone)]
pub struct Case {
    pub attrs: Vec<String>,
    /// (attribute, leaf) -> parent
    pub parents: BTreeMap<Pair, String>,
    /// Rows per period, one leaf value per attribute.
    pub periods: Vec<Vec<Vec<String>>>,
    pub min_sup: usize,
}

pub fn gen_case(rng: &mut impl Rng, n_periods: usize) -> Case {
    let n_attrs = rng.gen_range(1..=3);
    let names = ["A", "B", "C"];
    let attrs: Vec<String> = names[..n_attrs].iter().map(|s| s.to_string()).collect();
    let mut parents = BTreeMap::new();
    let mut leaves: Vec<Vec<String>> = Vec::new();
    for a in &attrs {
        let n_leaves = rng.gen_range(1..=4);
        let vals: Vec<String> = (0..n_leaves).map(|i| format!("{}{}", a.to_lowercase(), i)).collect();
        if rng.gen_bool(0.7) {
            let n_parents = rng.gen_range(1..=2);
            for v in &vals {
                let p = rng.gen_range(0..n_parents);
                parents.insert((a.clone(), v.clone()), format!("{a}{p}"));
            }
        }
        leaves.push(vals);
    }
    let periods = (0..n_periods)
        .map(|_| {
            let n_rows = rng.gen_range(1..=8);
            (0..n_rows)
                .map(|_| {
                    leaves
                        .iter()
                        .map(|vals| vals[rng.gen_range(0..vals.len())].clone())
                        .collect()
                })
                .collect()
        })
        .collect();
    Case {
        attrs,
        parents,
        periods,
        min_sup: rng.gen_range(1..=3),
    }
}

impl Case {
    pub fn log_csv(&self) -> String {
        let mut out = format!("date,{}\n", self.attrs.join(","));
        for (p, rows) in self.periods.iter().enumerate() {
            for (i, row) in rows.iter().enumerate() {
                out += &format!("2020-{:02}-{:02},{}\n", p + 1, i + 1, row.join(","));
            }
        }
        out
    }

    pub fn taxonomy_csv(&self) -> String {
        let mut out = String::from("attribute,child,parent\n");
        for ((a, c), p) in &self.parents {
            out += &format!("{a},{c},{p}\n");
        }
        out
    }

    pub fn load(&self) -> (PeriodSequence, Taxonomy) {
        let periods = load_periods(&self.log_csv(), &[], Granularity::Month).unwrap();
        let mut tax = Taxonomy::parse(&self.taxonomy_csv(), Some(&periods.schema)).unwrap();
        periods.register_domain(&mut tax).unwrap();
        (periods, tax)
    }

    fn parent(&self, attr: &str, value: &str) -> Option<&String> {
        self.parents.get(&(attr.to_string(), value.to_string()))
    }

    /// Every value an attribute can take in an itemset: observed leaves,
    /// hierarchy leaves and their parents.
    pub fn domain(&self, attr_idx: usize) -> BTreeSet<String> {
        let attr = &self.attrs[attr_idx];
        let mut out: BTreeSet<String> = self.periods.iter().flatten().map(|row| row[attr_idx].clone()).collect();
        for ((a, c), p) in &self.parents {
            if a == attr {
                out.insert(c.clone());
                out.insert(p.clone());
            }
        }
        out
    }

    fn is_leaf(&self, attr: &str, value: &str) -> bool {
        !self.parents.iter().any(|((a, _), p)| a == attr && p == value)
    }

    /// A row matches when every item equals the row's value or its parent.
    pub fn support(&self, period: usize, set: &[Pair]) -> usize {
        self.periods[period]
            .iter()
            .filter(|row| {
                set.iter().all(|(a, v)| {
                    let i = self.attrs.iter().position(|x| x == a).unwrap();
                    &row[i] == v || self.parent(a, &row[i]) == Some(v)
                })
            })
            .count()
    }

    /// Every non-empty itemset (at most one value per attribute).
    pub fn all_itemsets(&self) -> Vec<Set> {
        let mut out: Vec<Set> = vec![vec![]];
        for (i, a) in self.attrs.iter().enumerate() {
            let dom = self.domain(i);
            let mut next = Vec::new();
            for partial in &out {
                next.push(partial.clone());
                for v in &dom {
                    let mut s = partial.clone();
                    s.push((a.clone(), v.clone()));
                    next.push(s);
                }
            }
            out = next;
        }
        out.into_iter().filter(|s| !s.is_empty()).collect()
    }

    pub fn frequent(&self, period: usize) -> BTreeMap<Set, usize> {
        self.all_itemsets()
            .into_iter()
            .map(|s| {
                let sup = self.support(period, &s);
                (s, sup)
            })
            .filter(|(_, sup)| *sup >= self.min_sup)
            .collect()
    }

    pub fn is_leaf_set(&self, set: &[Pair]) -> bool {
        set.iter().all(|(a, v)| self.is_leaf(a, v))
    }

    /// Every strict generalization of a leaf itemset with its distance
    /// (number of items replaced by their parent).
    fn generalizations(&self, set: &[Pair]) -> Vec<(usize, Set)> {
        let mut out: Vec<(usize, Set)> = vec![(0, vec![])];
        for (a, v) in set {
            let mut next = Vec::new();
            for (d, partial) in &out {
                let mut keep = partial.clone();
                keep.push((a.clone(), v.clone()));
                next.push((*d, keep));
                if let Some(p) = self.parent(a, v) {
                    let mut up = partial.clone();
                    up.push((a.clone(), p.clone()));
                    next.push((d + 1, up));
                }
            }
            out = next;
        }
        out.into_iter().filter(|(d, _)| *d > 0).collect()
    }

    fn generalizes(&self, general: &[Pair], specific: &[Pair]) -> bool {
        general.len() == specific.len()
            && general
                .iter()
                .zip(specific)
                .all(|((ga, gv), (sa, sv))| ga == sa && (gv == sv || self.parent(sa, sv) == Some(gv)))
    }

    /// HIGENs by direct construction: `(reference, nodes, relations)`.
    pub fn higens(&self) -> Vec<HigenRow> {
        let n = self.periods.len();
        let references: Vec<Set> = self
            .all_itemsets()
            .into_iter()
            .filter(|s| self.is_leaf_set(s))
            .filter(|s| (0..n).any(|p| self.support(p, s) >= self.min_sup))
            .collect();
        let mut out = Vec::new();
        for r in references {
            let mut options: Vec<Vec<(Set, usize)>> = Vec::new();
            for p in 0..n {
                let sup = self.support(p, &r);
                if sup >= self.min_sup {
                    options.push(vec![(r.clone(), sup)]);
                    continue;
                }
                let frequent: Vec<(usize, Set, usize)> = self
                    .generalizations(&r)
                    .into_iter()
                    .map(|(d, g)| {
                        let s = self.support(p, &g);
                        (d, g, s)
                    })
                    .filter(|(_, _, s)| *s >= self.min_sup)
                    .collect();
                let Some(best) = frequent.iter().map(|(d, _, _)| *d).min() else {
                    break;
                };
                options.push(
                    frequent
                        .into_iter()
                        .filter(|(d, _, _)| *d == best)
                        .map(|(_, g, s)| (g, s))
                        .collect(),
                );
            }
            if options.len() < n {
                continue;
            }
            let mut seqs: Vec<Vec<(Set, usize)>> = vec![vec![]];
            for opts in &options {
                seqs = seqs
                    .into_iter()
                    .flat_map(|s| {
                        opts.iter().map(move |o| {
                            let mut t = s.clone();
                            t.push(o.clone());
                            t
                        })
                    })
                    .collect();
            }
            for nodes in seqs {
                let relations = nodes
                    .windows(2)
                    .map(|w| {
                        let (from, to) = (&w[0].0, &w[1].0);
                        if from == to {
                            "Same"
                        } else if self.generalizes(to, from) {
                            "Gen"
                        } else if self.generalizes(from, to) {
                            "Spec"
                        } else {
                            "Lateral"
                        }
                    })
                    .collect();
                out.push((r.clone(), nodes, relations));
            }
        }
        out.sort();
        out
    }
}

pub fn pairs(set: &Itemset) -> Set {
    set.items()
        .iter()
        .map(|i| (i.attribute.clone(), i.value.clone()))
        .collect()
}

pub fn random_image(rng: &mut impl Rng, max_side: usize) -> GrayImage {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    let pixels = (0..w * h).map(|_| rng.gen()).collect();
    GrayImage::new(w, h, pixels).unwrap()
}

pub fn brute_prefix(img: &GrayImage, x: usize, y: usize) -> u64 {
    let mut s = 0;
    for j in 0..=y {
        for i in 0..=x {
            s += img.get(i, j) as u64;
        }
    }
    s
}

/// Pixels with `j <= y` and `|i - x| <= y - j`.
pub fn brute_triangle(img: &GrayImage, x: i64, y: i64) -> i64 {
    let mut s = 0;
    for j in 0..img.height() as i64 {
        for i in 0..img.width() as i64 {
            if j <= y && (i - x).abs() <= y - j {
                s += img.get(i as usize, j as usize) as i64;
            }
        }
    }
    s
}

pub fn brute_rect(img: &GrayImage, x: usize, y: usize, w: usize, h: usize) -> u64 {
    let mut s = 0;
    for j in y..y + h {
        for i in x..x + w {
            s += img.get(i, j) as u64;
        }
    }
    s
}

/// 45-degree rectangle with top pixel `(x, y)`: pixels whose offsets
/// `u = di + dj` lie in `0..2w` and `v = dj - di` in `0..2h`.
pub fn brute_tilted(img: &GrayImage, x: i64, y: i64, w: i64, h: i64) -> i64 {
    let mut s = 0;
    for j in 0..img.height() as i64 {
        for i in 0..img.width() as i64 {
            let (di, dj) = (i - x, j - y);
            let (u, v) = (di + dj, dj - di);
            if (0..2 * w).contains(&u) && (0..2 * h).contains(&v) {
                s += img.get(i as usize, j as usize) as i64;
            }
        }
    }
    s
}

/// A random valid feature of any kind inside a `w x h` window, if one fits.
pub fn random_feature(rng: &mut impl Rng, w: usize, h: usize) -> Option<HaarFeature> {
    let (wi, hi) = (w as i64, h as i64);
    let window = (w, h);
    let pick = |rng: &mut dyn rand::RngCore, max: i64| if max < 1 { None } else { Some(rng.gen_range(1..=max)) };
    match rng.gen_range(0..5) {
        0 => {
            let cw = pick(rng, wi / 2)?;
            let ch = pick(rng, hi)?;
            let x = rng.gen_range(0..=wi - 2 * cw);
            let y = rng.gen_range(0..=hi - ch);
            HaarFeature::two_rect_horizontal(x, y, cw, ch, window).ok()
        }
        1 => {
            let cw = pick(rng, wi)?;
            let ch = pick(rng, hi / 2)?;
            let x = rng.gen_range(0..=wi - cw);
            let y = rng.gen_range(0..=hi - 2 * ch);
            HaarFeature::two_rect_vertical(x, y, cw, ch, window).ok()
        }
        2 => {
            let cw = pick(rng, wi / 4)?;
            let ch = pick(rng, hi)?;
            let x = rng.gen_range(0..=wi - 4 * cw);
            let y = rng.gen_range(0..=hi - ch);
            HaarFeature::three_rect(x, y, cw, ch, window).ok()
        }
        3 => {
            let cw = pick(rng, wi / 2)?;
            let ch = pick(rng, hi / 2)?;
            let x = rng.gen_range(0..=wi - 2 * cw);
            let y = rng.gen_range(0..=hi - 2 * ch);
            HaarFeature::four_rect(x, y, cw, ch, window).ok()
        }
        _ => {
            // two tilted rectangles need 2w + h - 1 columns and 2w + h rows
            let tw = pick(rng, 3)?;
            let th = pick(rng, 3)?;
            if 2 * tw + th - 1 > wi || 2 * tw + th > hi {
                return None;
            }
            let x = rng.gen_range(th - 1..=wi - 2 * tw);
            let y = rng.gen_range(0..=hi - 2 * tw - th);
            HaarFeature::tilted_edge(x, y, tw, th, window).ok()
        }
    }
}

pub fn brute_feature(img: &GrayImage, f: &HaarFeature, at: Placement) -> i64 {
    let s = |v: i64| (v as f64 * at.scale).floor() as i64;
    f.rects
        .iter()
        .map(|r| {
            let (x, y, w, h) = (s(r.x) + at.x as i64, s(r.y) + at.y as i64, s(r.w).max(1), s(r.h).max(1));
            let sum = if f.kind == FeatureKind::Tilted {
                brute_tilted(img, x, y, w, h)
            } else {
                brute_rect(img, x as usize, y as usize, w as usize, h as usize) as i64
            };
            r.weight * sum
        })
        .sum()
}

pub const EYES_CASCADE: &str = include_str!("../../../../data/example/cascades/eyes.cascade");

/// 12x12 block: bright forehead, two dark eyes with a bright bridge,
/// light cheeks, a mid-gray chin.
pub fn face_patch() -> GrayImage {
    GrayImage::from_fn(12, 12, |x, y| match y {
        0..=1 => 200,
        2..=4 if (1..5).contains(&x) || (7..11).contains(&x) => 30,
        2..=4 => 200,
        5..=8 => 220,
        _ => 160,
    })
}

/// Uniform background with the face patch pasted at each position.
pub fn scene(width: usize, height: usize, at: &[(usize, usize)]) -> GrayImage {
    let mut img = GrayImage::filled(width, height, 128);
    for &(x, y) in at {
        img.paste(&face_patch(), x, y);
    }
    img
}
