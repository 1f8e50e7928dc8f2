//! Frozen synthetic-trial baseline shared by the regression and acceptance
//! targets.
#![allow(dead_code)]

use std::path::Path;

use medbounds::RecordTable;
use num_rational::BigRational;
use num_traits::ToPrimitive;

pub fn synthetic() -> RecordTable {
    RecordTable::from_csv_path(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_trial.csv")).unwrap()
}

pub const COUNTS: [u64; 16] = [162, 9, 20, 10, 34, 23, 9, 32, 88, 38, 33, 84, 27, 49, 27, 254];

pub const FROZEN: [(&str, &str, &str); 14] = [
    ("TE", "15981/59800", "15981/59800"),
    ("CDE-00", "-24709/59800", "16586/22425"),
    ("CDE-01", "-159349/179400", "3353/3900"),
    ("CDE-10", "-53109/59800", "54711/59800"),
    ("CDE-11", "-48727/89700", "11257/14950"),
    ("NDE-000", "-98/299", "201/299"),
    ("JNIE-1", "-81/200", "119/200"),
    ("MS2NIE1-11", "-81/200", "119/200"),
    ("NIE2-100", "-1", "1"),
    ("NIE1-110", "-80801/89700", "80801/89700"),
    ("NIE12-111", "-81/200", "119/200"),
    ("NIE2-001", "-3581/7176", "32363/35880"),
    ("NIE12-110", "-31663/59800", "17731/22425"),
    ("JNIE-0", "-98/299", "201/299"),
];

pub fn ratio(s: &str) -> BigRational {
    medbounds::lp::parse_decimal(s).unwrap()
}

pub fn to_f64(s: &str) -> f64 {
    ratio(s).to_f64().unwrap()
}
