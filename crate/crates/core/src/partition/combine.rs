use std::collections::BTreeSet;
use std::str::FromStr;

use super::{EquivalenceClass, PartitionError, Result, TestFrame};

/// How per-variable classes are combined into frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Every combination.
    ACoC,
    /// Each class of each variable at least once.
    ECC,
    /// Every pair of classes across two variables at least once.
    PWC,
    /// A base frame plus one frame per non-base class.
    BCC,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ACoC" => Ok(Strategy::ACoC),
            "ECC" => Ok(Strategy::ECC),
            "PWC" => Ok(Strategy::PWC),
            "BCC" => Ok(Strategy::BCC),
            other => Err(format!("unknown combination strategy `{other}`")),
        }
    }
}

type Pair = ((usize, usize), (usize, usize));

fn pairs_of(frame: &[usize]) -> impl Iterator<Item = Pair> + '_ {
    (0..frame.len()).flat_map(move |a| ((a + 1)..frame.len()).map(move |b| ((a, frame[a]), (b, frame[b]))))
}

fn all_pairs(sizes: &[usize]) -> BTreeSet<Pair> {
    let mut out = BTreeSet::new();
    for a in 0..sizes.len() {
        for b in a + 1..sizes.len() {
            for ca in 0..sizes[a] {
                for cb in 0..sizes[b] {
                    out.insert(((a, ca), (b, cb)));
                }
            }
        }
    }
    out
}

fn pairwise(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut uncovered = all_pairs(sizes);
    let mut frames: Vec<Vec<usize>> = Vec::new();
    while let Some(&((a, ca), (b, cb))) = uncovered.iter().next() {
        let mut frame: Vec<Option<usize>> = vec![None; sizes.len()];
        frame[a] = Some(ca);
        frame[b] = Some(cb);
        for v in 0..sizes.len() {
            if frame[v].is_some() {
                continue;
            }
            // class covering the most open pairs with the variables fixed so far
            let gain = |c: usize| {
                frame
                    .iter()
                    .enumerate()
                    .filter_map(|(u, fu)| fu.map(|cu| (u, cu)))
                    .filter(|&(u, cu)| {
                        let p = if u < v { ((u, cu), (v, c)) } else { ((v, c), (u, cu)) };
                        uncovered.contains(&p)
                    })
                    .count()
            };
            let best = (0..sizes[v]).max_by_key(|&c| (gain(c), std::cmp::Reverse(c))).unwrap_or(0);
            frame[v] = Some(best);
        }
        let frame: Vec<usize> = frame.into_iter().map(|c| c.unwrap_or(0)).collect();
        for p in pairs_of(&frame) {
            uncovered.remove(&p);
        }
        frames.push(frame);
    }
    frames
}

fn each_choice(sizes: &[usize]) -> Vec<Vec<usize>> {
    let rows = sizes.iter().copied().max().unwrap_or(0);
    (0..rows).map(|r| sizes.iter().map(|&s| r.min(s - 1)).collect()).collect()
}

fn all_combinations(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (0..s).map(move |c| {
                    let mut f = prefix.clone();
                    f.push(c);
                    f
                })
            })
            .collect();
    }
    out
}

/// Adds frames until every class of every variable appears.
fn complete(sizes: &[usize], frames: &mut Vec<Vec<usize>>) {
    for v in 0..sizes.len() {
        for c in 0..sizes[v] {
            if !frames.iter().any(|f| f[v] == c) {
                let mut f = vec![0; sizes.len()];
                f[v] = c;
                frames.push(f);
            }
        }
    }
}

/// Frames over `classes` (one list per variable). `base` gives the class
/// index per variable for base-choice coverage.
pub fn combine(
    classes: &[Vec<EquivalenceClass>],
    strategy: Strategy,
    base: Option<&[usize]>,
) -> Result<Vec<TestFrame>> {
    if let Some(i) = classes.iter().position(|c| c.is_empty()) {
        return Err(PartitionError::Empty(format!("#{i}")));
    }
    let sizes: Vec<usize> = classes.iter().map(Vec::len).collect();
    let mut frames = match strategy {
        Strategy::ACoC => all_combinations(&sizes),
        Strategy::ECC => each_choice(&sizes),
        Strategy::PWC => pairwise(&sizes),
        Strategy::BCC => {
            let base = base.ok_or(PartitionError::MissingBase)?;
            if base.len() != sizes.len() || base.iter().zip(&sizes).any(|(b, s)| b >= s) {
                return Err(PartitionError::MissingBase);
            }
            let mut out = vec![base.to_vec()];
            for v in 0..sizes.len() {
                for c in (0..sizes[v]).filter(|&c| c != base[v]) {
                    let mut f = base.to_vec();
                    f[v] = c;
                    out.push(f);
                }
            }
            out
        }
    };
    if classes.is_empty() {
        frames = vec![Vec::new()];
    }
    complete(&sizes, &mut frames);
    Ok(frames
        .into_iter()
        .map(|f| TestFrame { classes: f.iter().enumerate().map(|(v, &c)| classes[v][c].clone()).collect() })
        .collect())
}

/// Brute-force check that every cross-variable class pair occurs in some frame.
pub fn covers_all_pairs(classes: &[Vec<EquivalenceClass>], frames: &[TestFrame]) -> bool {
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            for ca in &classes[a] {
                for cb in &classes[b] {
                    if !frames.iter().any(|f| &f.classes[a] == ca && &f.classes[b] == cb) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
