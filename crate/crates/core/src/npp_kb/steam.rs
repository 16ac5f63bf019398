use std::sync::OnceLock;

use super::KbError;
use crate::rulelang::parse_program;

pub const STEAM_TABLE_KB: &str = include_str!("../../kb/steam_table.kb");

/// `(temperature °F, saturation pressure PSI)`, ascending in both columns.
pub fn steam_table() -> &'static [(i64, i64)] {
    static TABLE: OnceLock<Vec<(i64, i64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let p = parse_program(STEAM_TABLE_KB).expect("shipped steam table parses");
        let mut t: Vec<(i64, i64)> = p
            .facts()
            .filter(|a| &*a.predicate == "saturation")
            .map(|a| {
                let int = |i: usize| a.args[i].eval(&|_| None).and_then(|v| v.as_int());
                (int(0).expect("integer"), int(1).expect("integer"))
            })
            .collect();
        t.sort_unstable();
        t
    })
}

/// Step lookup: the entry at the greatest tabulated temperature not above
/// `temp`.
pub fn saturation_pressure(temp: i64) -> Result<i64, KbError> {
    let t = steam_table();
    match t.partition_point(|&(x, _)| x <= temp) {
        0 => Err(KbError::BelowTable { temp, min: t[0].0 }),
        i => Ok(t[i - 1].1),
    }
}
