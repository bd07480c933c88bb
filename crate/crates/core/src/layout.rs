//! Declustered layouts: one parity-group instance per design block.
//!
//! Group column `c` of the instance for block `B_i` goes to the `c`-th
//! smallest point of `B_i`. On each disk, column-units are stacked in
//! increasing instance index, and each column-unit holds the group's `m`
//! entries extended row by extended row.
//!
//! A `δ = 1` group with a single arrangement is the classic single-failure
//! construction: data on the `k − 1` smallest points, parity on the largest.

use serde::{Deserialize, Serialize};

use crate::designs::{count_lambda, Design, DesignFile};
use crate::parity_groups::{GroupSpec, ParityGroup};
use crate::{Error, Ratio, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclusteredLayout {
    design: Design,
    group: ParityGroup,
    rotated: u32,
    /// `placements[i][c]`: disk holding group column `c` of instance `i`.
    placements: Vec<Vec<usize>>,
    /// `disk_units[x]`: `(instance, column)` pairs stacked on disk `x`.
    disk_units: Vec<Vec<(usize, usize)>>,
    /// `slots[i][c]`: stacking position of that column-unit on its disk.
    slots: Vec<Vec<usize>>,
}

/// Places one instance of `group` on the points of every block of `design`.
/// Needs `design.k = group.k` and `design.t = group.δ + 1`.
pub fn build_layout(group: &ParityGroup, design: &Design) -> Result<DeclusteredLayout> {
    if design.k() != group.k() {
        return Err(Error::Mismatch(format!(
            "design blocks have {} points but the group has {} columns",
            design.k(),
            group.k()
        )));
    }
    if design.t() != group.delta() + 1 {
        return Err(Error::Mismatch(format!(
            "a group tolerating {} failures needs a {}-design, got t = {}",
            group.delta(),
            group.delta() + 1,
            design.t()
        )));
    }
    let placements = design.blocks().to_vec();
    DeclusteredLayout::assemble(design.clone(), group.clone(), 0, placements)
}

/// Stacks `n` copies of a single-parity layout, copy `s` shifted by `s`
/// disks, which evens out the parity units per disk.
pub fn rotate_layout(layout: &DeclusteredLayout) -> Result<DeclusteredLayout> {
    if layout.group.delta() != 1 {
        return Err(Error::Param(format!(
            "rotation applies to single-parity layouts; this group has {} parities",
            layout.group.delta()
        )));
    }
    let n = layout.n();
    let placements = (0..n)
        .flat_map(|s| {
            layout
                .placements
                .iter()
                .map(move |p| p.iter().map(|&x| (x + s) % n).collect())
        })
        .collect();
    DeclusteredLayout::assemble(
        layout.design.clone(),
        layout.group.clone(),
        layout.rotated + 1,
        placements,
    )
}

impl DeclusteredLayout {
    fn assemble(
        design: Design,
        group: ParityGroup,
        rotated: u32,
        placements: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = design.n();
        check_placements(n, group.k(), &placements)?;
        let mut disk_units = vec![Vec::new(); n];
        let mut slots = Vec::with_capacity(placements.len());
        for (i, p) in placements.iter().enumerate() {
            slots.push(
                p.iter()
                    .enumerate()
                    .map(|(c, &x)| {
                        disk_units[x].push((i, c));
                        disk_units[x].len() - 1
                    })
                    .collect(),
            );
        }
        let per_disk = disk_units[0].len();
        if let Some(x) = disk_units.iter().position(|u| u.len() != per_disk) {
            return Err(Error::Invariant(format!(
                "disk {x} holds {} column-units, disk 0 holds {per_disk}",
                disk_units[x].len()
            )));
        }
        Ok(DeclusteredLayout {
            design,
            group,
            rotated,
            placements,
            disk_units,
            slots,
        })
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn group(&self) -> &ParityGroup {
        &self.group
    }

    /// How many times the layout was rotated.
    pub fn rotated(&self) -> u32 {
        self.rotated
    }

    pub fn placements(&self) -> &[Vec<usize>] {
        &self.placements
    }

    pub fn instances(&self) -> usize {
        self.placements.len()
    }

    /// `(instance, group column)` for each column-unit of `disk`, top to bottom.
    pub fn disk_units(&self, disk: usize) -> &[(usize, usize)] {
        &self.disk_units[disk]
    }

    pub fn column_units_per_disk(&self) -> usize {
        self.disk_units[0].len()
    }

    /// Depth `M` of the whole array.
    pub fn rows_per_disk(&self) -> usize {
        self.column_units_per_disk() * self.group.m()
    }

    /// Disk and first unit offset of group column `column` of `instance`.
    pub fn locate(&self, instance: usize, column: usize) -> (usize, usize) {
        let disk = self.placements[instance][column];
        (disk, self.slots[instance][column] * self.group.m())
    }

    pub fn to_file(&self) -> Result<LayoutFile> {
        Ok(LayoutFile {
            n: self.n(),
            design: self.design.to_file(),
            group: self.group.spec()?,
            rotated: self.rotated,
            placements: self.placements.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&self.to_file()?).map_err(|e| Error::Format(e.to_string()))
    }

    /// Parses a layout file, rebuilds it from its design and group, and
    /// checks the stored placements against the rebuilt ones.
    pub fn from_json(text: &str) -> Result<DeclusteredLayout> {
        let file: LayoutFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.into_layout()
    }
}

fn check_placements(n: usize, k: usize, placements: &[Vec<usize>]) -> Result<()> {
    for (i, p) in placements.iter().enumerate() {
        if p.len() != k {
            return Err(Error::Invariant(format!(
                "instance {i} spans {} disks, the group has {k} columns",
                p.len()
            )));
        }
        if let Some(&x) = p.iter().find(|&&x| x >= n) {
            return Err(Error::Invariant(format!("instance {i} uses disk {x} outside 0..{n}")));
        }
        let mut sorted = p.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invariant(format!(
                "instance {i} puts two of its units on the same disk"
            )));
        }
    }
    Ok(())
}

/// `{"n":8,"design":{…},"group":{"code":"rdp","p":3},"placements":[[0,1,2,3],…]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutFile {
    pub n: usize,
    pub design: DesignFile,
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub rotated: u32,
    pub placements: Vec<Vec<usize>>,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

impl LayoutFile {
    pub fn into_layout(self) -> Result<DeclusteredLayout> {
        if self.n != self.design.n {
            return Err(Error::Invariant(format!(
                "layout has n = {} but its design has n = {}",
                self.n, self.design.n
            )));
        }
        let group = self.group.build()?;
        check_placements(self.n, group.k(), &self.placements)?;
        let design = self
            .design
            .into_design()
            .map_err(|e| Error::Invariant(format!("embedded design: {e}")))?;
        let mut layout = build_layout(&group, &design)?;
        for _ in 0..self.rotated {
            layout = rotate_layout(&layout)?;
        }
        if layout.placements != self.placements {
            return Err(Error::Invariant(
                "stored placements differ from the ones the design and group produce".into(),
            ));
        }
        Ok(layout)
    }
}

/// Unit counts of a layout, tallied unit by unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Geometry {
    pub n: usize,
    pub k: usize,
    pub delta: usize,
    pub instances: usize,
    /// `m`, entries per group column.
    pub group_depth: usize,
    /// `M`, entries per disk.
    pub rows_per_disk: usize,
    pub column_units_per_disk: usize,
    pub parity_units_per_disk: Vec<u64>,
    pub total_parity_units: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub parity_disks: Ratio,
    #[serde(serialize_with = "ser_ratio")]
    pub data_disks: Ratio,
}

pub(crate) fn ser_ratio<S: serde::Serializer>(r: &Ratio, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl Geometry {
    pub fn parity_uniform(&self) -> bool {
        self.parity_units_per_disk.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn layout_geometry(layout: &DeclusteredLayout) -> Geometry {
    let group = &layout.group;
    let per_column = group.parity_entries_per_column();
    let parity_units_per_disk: Vec<u64> = (0..layout.n())
        .map(|x| layout.disk_units[x].iter().map(|&(_, c)| per_column[c]).sum())
        .collect();
    let total: u64 = parity_units_per_disk.iter().sum();
    let rows = layout.rows_per_disk();
    let parity_disks = Ratio::new(total as u128, rows as u128);
    Geometry {
        n: layout.n(),
        k: group.k(),
        delta: group.delta(),
        instances: layout.instances(),
        group_depth: group.m(),
        rows_per_disk: rows,
        column_units_per_disk: layout.column_units_per_disk(),
        parity_units_per_disk,
        total_parity_units: total,
        parity_disks,
        data_disks: Ratio::from_integer(layout.n() as u128) - parity_disks,
    }
}

/// `δn/k` disks worth of parity.
pub fn parity_disks_closed_form(n: usize, k: usize, delta: usize) -> Ratio {
    Ratio::new((delta * n) as u128, k as u128)
}

/// `M = m·λ₁`.
pub fn rows_per_disk_closed_form(group: &ParityGroup, design: &Design) -> Result<u64> {
    Ok(group.m() as u64 * count_lambda(design.params(), 1, 0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{complete_design, example_2_5_4_3, example_3_8_4_1};
    use crate::erasure_codes::{ColumnLabel, HorizontalCode};
    use crate::parity_groups::balance_horizontal_code;

    fn rdp3() -> ParityGroup {
        balance_horizontal_code(HorizontalCode::rdp(3).unwrap())
    }

    fn simple_parity(k: usize) -> ParityGroup {
        ParityGroup::single(HorizontalCode::reed_solomon(k, 1).unwrap())
    }

    #[test]
    fn two_failure_example_geometry() {
        let layout = build_layout(&rdp3(), &example_3_8_4_1()).unwrap();
        assert_eq!(layout.n(), 8);
        assert_eq!(layout.instances(), 14);
        assert_eq!(layout.column_units_per_disk(), 7);
        assert_eq!(layout.rows_per_disk(), 168);
        assert_eq!(rows_per_disk_closed_form(&rdp3(), &example_3_8_4_1()).unwrap(), 168);
        let groups_on_7: Vec<usize> = layout.disk_units(7).iter().map(|u| u.0).collect();
        assert_eq!(groups_on_7, [2, 4, 5, 7, 8, 10, 13]);
    }

    #[test]
    fn single_failure_example_places_parity_last() {
        let layout = build_layout(&simple_parity(4), &example_2_5_4_3()).unwrap();
        // block {1,2,3,4} is instance 4
        assert_eq!(layout.placements()[4], [1, 2, 3, 4]);
        let labels = layout.group().arrangements()[0].labels();
        assert_eq!(labels[3], ColumnLabel::Parity(1));
        let geo = layout_geometry(&layout);
        assert_eq!(geo.rows_per_disk, 4);
        // before rotation disk 4 holds 4 parities, disk 0 none
        assert_eq!(geo.parity_units_per_disk, [0, 0, 0, 1, 4]);
    }

    #[test]
    fn rotation_evens_parity() {
        let layout = build_layout(&simple_parity(4), &example_2_5_4_3()).unwrap();
        let rotated = rotate_layout(&layout).unwrap();
        let geo = layout_geometry(&rotated);
        assert_eq!(geo.rows_per_disk, 20);
        assert_eq!(geo.parity_units_per_disk, [5; 5]);

        let twice = layout_geometry(&rotate_layout(&rotated).unwrap());
        assert_eq!(twice.rows_per_disk, 100);
        assert_eq!(twice.parity_units_per_disk, [25; 5]);
        assert_eq!(twice.parity_disks, geo.parity_disks);
    }

    #[test]
    fn rotation_of_one_block() {
        let layout = build_layout(&simple_parity(4), &complete_design(4, 4, 2).unwrap()).unwrap();
        let rotated = rotate_layout(&layout).unwrap();
        assert_eq!(rotated.instances(), 4);
        assert_eq!(layout_geometry(&rotated).parity_units_per_disk, [1; 4]);
    }

    #[test]
    fn rotation_needs_single_parity() {
        let layout = build_layout(&rdp3(), &example_3_8_4_1()).unwrap();
        assert!(matches!(rotate_layout(&layout), Err(Error::Param(_))));
    }

    #[test]
    fn no_declustering_when_n_equals_k() {
        let layout = build_layout(&rdp3(), &complete_design(4, 4, 3).unwrap()).unwrap();
        assert_eq!(layout.instances(), 1);
        assert_eq!(layout.rows_per_disk(), 24);
        let geo = layout_geometry(&layout);
        assert_eq!(geo.parity_disks, Ratio::from_integer(2));
    }

    #[test]
    fn mismatches() {
        let two_design = example_2_5_4_3();
        assert!(matches!(build_layout(&rdp3(), &two_design), Err(Error::Mismatch(_))));
        let rs5 = balance_horizontal_code(HorizontalCode::reed_solomon(5, 2).unwrap());
        assert!(matches!(build_layout(&rs5, &example_3_8_4_1()), Err(Error::Mismatch(_))));
    }

    #[test]
    fn geometry_matches_closed_form() {
        let geo = layout_geometry(&build_layout(&rdp3(), &example_3_8_4_1()).unwrap());
        assert_eq!(geo.parity_disks, Ratio::from_integer(4));
        assert_eq!(geo.data_disks, Ratio::from_integer(4));
        assert_eq!(geo.total_parity_units, 2 * 24 * 14);
        assert!(geo.parity_uniform());
        assert_eq!(parity_disks_closed_form(8, 4, 2), geo.parity_disks);
        assert_eq!(parity_disks_closed_form(20, 5, 2), Ratio::from_integer(8));
    }

    #[test]
    fn file_round_trip_and_rejections() {
        let layout = build_layout(&rdp3(), &example_3_8_4_1()).unwrap();
        let text = layout.to_json().unwrap();
        assert_eq!(DeclusteredLayout::from_json(&text).unwrap(), layout);

        let mut file = layout.to_file().unwrap();
        file.placements[3][1] = 8;
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(DeclusteredLayout::from_json(&text), Err(Error::Invariant(_))));

        let mut file = layout.to_file().unwrap();
        file.placements[3][1] = 0;
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(DeclusteredLayout::from_json(&text), Err(Error::Invariant(_))));

        let mut file = layout.to_file().unwrap();
        file.design.blocks[0][3] = 9;
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(DeclusteredLayout::from_json(&text), Err(Error::Invariant(_))));

        let mut file = layout.to_file().unwrap();
        file.placements.swap(0, 1);
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(DeclusteredLayout::from_json(&text), Err(Error::Invariant(_))));

        assert!(matches!(DeclusteredLayout::from_json("[1,2]"), Err(Error::Format(_))));
    }

    #[test]
    fn rotated_file_round_trip() {
        let layout = build_layout(&simple_parity(4), &example_2_5_4_3()).unwrap();
        let rotated = rotate_layout(&layout).unwrap();
        let text = rotated.to_json().unwrap();
        assert!(text.contains("\"rotated\":1"));
        assert_eq!(DeclusteredLayout::from_json(&text).unwrap(), rotated);
    }
}
