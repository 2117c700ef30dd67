//! Irreducible characters of the symmetric group.
//!
//! Tables are built with the Murnaghan–Nakayama rule on beta-sets: removing a
//! border strip of length `h` from a frame is the same as moving one bead of its
//! beta-set down by `h` onto a free position, and the strip height is the number
//! of beads jumped over.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{check_r, classes_unchecked, partitions_unchecked, ConjClass, Frame};

/// Character table of `S_r`: rows follow [`crate::partitions::partitions_of`],
/// columns follow [`crate::partitions::classes_of`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharTable {
    pub r: usize,
    pub frames: Vec<Frame>,
    pub classes: Vec<ConjClass>,
    pub table: Vec<Vec<i64>>,
}

impl CharTable {
    pub fn frame_index(&self, frame: &Frame) -> Option<usize> {
        self.frames.iter().position(|f| f == frame)
    }

    pub fn class_index(&self, class: &ConjClass) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    pub fn value(&self, frame: &Frame, class: &ConjClass) -> Option<i64> {
        Some(self.table[self.frame_index(frame)?][self.class_index(class)?])
    }
}

type MemoKey = (Vec<usize>, Vec<usize>);

fn murnaghan_nakayama(rows: &[usize], cycles: &[usize], memo: &mut HashMap<MemoKey, i64>) -> i64 {
    let Some((&h, rest)) = cycles.split_first() else {
        return if rows.is_empty() { 1 } else { 0 };
    };
    let key = (rows.to_vec(), cycles.to_vec());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let k = rows.len();
    let beta: Vec<usize> = (0..k).map(|i| rows[i] + k - 1 - i).collect();
    let mut total = 0i64;
    for i in 0..k {
        let b = beta[i];
        if b < h || beta.contains(&(b - h)) {
            continue;
        }
        let target = b - h;
        let height = beta.iter().filter(|&&x| target < x && x < b).count();
        let mut moved = beta.clone();
        moved[i] = target;
        moved.sort_unstable_by(|a, b| b.cmp(a));
        let mut new_rows: Vec<usize> = (0..k).map(|j| moved[j] - (k - 1 - j)).collect();
        while new_rows.last() == Some(&0) {
            new_rows.pop();
        }
        let sign = if height % 2 == 0 { 1 } else { -1 };
        total += sign * murnaghan_nakayama(&new_rows, rest, memo);
    }
    memo.insert(key, total);
    total
}

fn build_table(r: usize) -> CharTable {
    let frames = partitions_unchecked(r);
    let classes = classes_unchecked(r);
    let mut memo = HashMap::new();
    let table = frames
        .iter()
        .map(|f| {
            classes
                .iter()
                .map(|c| murnaghan_nakayama(f.rows(), c.cycle_type().rows(), &mut memo))
                .collect()
        })
        .collect();
    CharTable {
        r,
        frames,
        classes,
        table,
    }
}

static TABLES: OnceLock<Mutex<HashMap<usize, Arc<CharTable>>>> = OnceLock::new();

/// The complete character table of `S_r`, `1 <= r <= 12`. Tables are cached per process.
pub fn character_table(r: usize) -> Result<Arc<CharTable>> {
    check_r(r)?;
    let cache = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("table cache poisoned").get(&r) {
        return Ok(t.clone());
    }
    let table = Arc::new(build_table(r));
    let mut guard = cache.lock().expect("table cache poisoned");
    Ok(guard.entry(r).or_insert(table).clone())
}

/// `chi^[m]_alpha` for a single frame and class of the same weight.
pub fn character(frame: &Frame, alpha: &ConjClass) -> Result<i64> {
    if frame.weight() != alpha.r() {
        return Err(Error::WeightMismatch {
            frame: frame.clone(),
            frame_weight: frame.weight(),
            class_r: alpha.r(),
        });
    }
    let t = character_table(alpha.r())?;
    Ok(t.value(frame, alpha).expect("frame and class belong to the table"))
}
