//! Per-class report: bundled wiring (or a search) against the listed values.

use std::cmp::Ordering;
use std::path::Path;

use nsbox::bell::{chsh_max, uffink_max};
use nsbox::rational::{int, parse_rational};
use nsbox::wiring::{apply_wiring, search_max, Functional, Wiring};
use nsbox::Rational;

use crate::{load, usage, CmdResult, Failure};

const DATA: &str = include_str!("../data/table1.tsv");

pub(crate) struct Row {
    pub class: u32,
    pub wiring: Option<Wiring>,
    pub chsh: Option<Rational>,
    pub uffink: Option<Rational>,
}

fn optional<T>(field: &str, parse: impl Fn(&str) -> T) -> Option<T> {
    (field != "-").then(|| parse(field))
}

pub(crate) fn rows() -> Vec<Row> {
    DATA.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split('\t').collect();
            assert_eq!(f.len(), 7, "bundled table row: {line}");
            Row {
                class: f[0].parse().expect("class number"),
                wiring: optional(f[4], |s| s.parse().expect("bundled wiring")),
                chsh: optional(f[5], |s| parse_rational(s).expect("bundled value")),
                uffink: optional(f[6], |s| parse_rational(s).expect("bundled value")),
            }
        })
        .collect()
}

/// A missing listed value means the criterion is not violated, so it
/// matches any computed value that does not violate it.
fn compare(computed: &Rational, listed: &Option<Rational>, violated: bool) -> Ordering {
    match listed {
        Some(v) => computed.cmp(v),
        None if violated => Ordering::Greater,
        None => Ordering::Equal,
    }
}

pub(crate) fn flag(row: &Row, chsh: &Rational, uffink: &Rational) -> &'static str {
    let c = compare(chsh, &row.chsh, chsh * chsh > int(8));
    let u = compare(uffink, &row.uffink, *uffink > int(4));
    let greater = c.is_gt() || u.is_gt();
    let less = c.is_lt() || u.is_lt();
    match (greater, less) {
        (false, false) if row.chsh.is_none() && row.uffink.is_none() => "no-violation",
        (false, false) => "ok",
        (true, false) => ">",
        (false, true) => "<",
        (true, true) => "<>",
    }
}

fn show(v: &Option<Rational>) -> String {
    v.as_ref()
        .map_or_else(|| "-".to_string(), Rational::to_string)
}

pub(crate) fn run(dir: &Path) -> CmdResult {
    if !dir.is_dir() {
        return Err(usage(format!("{} is not a directory", dir.display())));
    }
    println!("class\twiring\tchsh\tuffink\tpaper_chsh\tpaper_uffink\tflag");
    for row in rows() {
        let path = dir.join(format!("class{:02}.box", row.class));
        if !path.is_file() {
            continue;
        }
        let path = path.to_string_lossy().into_owned();
        let b = load(&path)?
            .as_box3()
            .cloned()
            .ok_or_else(|| Failure::Usage(anyhow::anyhow!("{path}: expected a tripartite box")))?;
        let (wiring, chsh, uffink) = match &row.wiring {
            Some(w) => {
                let eff = apply_wiring(&b, w)?;
                (w.to_string(), chsh_max(&eff), uffink_max(&eff))
            }
            None => {
                let (_, c) = search_max(&b, Functional::ChshMax)?;
                let (_, u) = search_max(&b, Functional::UffinkMax)?;
                ("search".to_string(), c, u)
            }
        };
        println!(
            "{}\t{wiring}\t{chsh}\t{uffink}\t{}\t{}\t{}",
            row.class,
            show(&row.chsh),
            show(&row.uffink),
            flag(&row, &chsh, &uffink)
        );
    }
    Ok(())
}
