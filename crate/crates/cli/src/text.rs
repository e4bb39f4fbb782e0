//! Plain-text renderings. Rationals print as p/q, series in grade order.

use std::fmt::Write;
use toricgw::invariants::{DiskPotential, InvariantTable, OracleReport};
use toricgw::mirror::MirrorMap;
use toricgw::rational::format_q;
use toricgw::series::RelationKind;
use toricgw::syz::MirrorPotential;
use toricgw::{BoxSet, StackyFan, ToricData, Q};

fn row(xs: &[Q]) -> String {
    xs.iter().map(format_q).collect::<Vec<_>>().join(" ")
}

pub fn analyze(fan: &StackyFan, boxes: &BoxSet, data: &ToricData) -> String {
    let mut s = String::new();
    writeln!(s, "rank {}  rays {}  extra vectors {}", fan.rank, fan.m(), fan.m_ext() - fan.m()).unwrap();
    writeln!(s, "box elements:").unwrap();
    for b in &boxes.elements {
        writeln!(s, "  {:?} age {} cone {:?}", b.vector, format_q(&b.age), b.cone).unwrap();
    }
    writeln!(s, "kernel basis (first {} span H2):", data.r_h2).unwrap();
    for g in &data.kernel_basis {
        writeln!(s, "  {}", row(g)).unwrap();
    }
    match &data.cy_covector {
        Some(v) => writeln!(s, "calabi-yau covector {v:?}").unwrap(),
        None => writeln!(s, "not calabi-yau").unwrap(),
    }
    let sf = toricgw::verify_semi_fano(data);
    writeln!(s, "semi-fano {}", if sf.holds() { "yes" } else { "no" }).unwrap();
    s
}

pub fn mirror_map(mm: &MirrorMap) -> String {
    let mut s = String::new();
    writeln!(s, "order {}", format_q(&mm.order)).unwrap();
    for (i, g) in &mm.g_list {
        writeln!(s, "g{i} = {g}").unwrap();
    }
    for r in &mm.forward {
        match r.kind {
            RelationKind::Multiplicative => writeln!(s, "{} = {} * exp({})", r.target, r.source, r.series),
            RelationKind::Additive => writeln!(s, "{} = {}", r.target, r.forward().expect("relation expands")),
        }
        .unwrap();
    }
    if let Some(inv) = &mm.inverse {
        for (v, series) in inv {
            writeln!(s, "{v} = {series}").unwrap();
        }
    }
    s
}

pub fn invariants(dp: &DiskPotential, table: &InvariantTable) -> String {
    let mut s = String::new();
    writeln!(s, "disk {}  order {}", dp.disk, format_q(dp.series.order())).unwrap();
    writeln!(s, "potential = {}", dp.series).unwrap();
    for (k, v) in &table.entries {
        let ins: Vec<String> = k.insertions.iter().map(|(l, n)| format!("{l}:{n}")).collect();
        writeln!(s, "alpha {:?} {{{}}} -> {}", k.alpha, ins.join(", "), format_q(v)).unwrap();
    }
    s
}

pub fn syz(mp: &MirrorPotential) -> String {
    let mut s = String::new();
    writeln!(s, "uv = G, W = u  (gauge cone {})", mp.coefficients.gauge.cone).unwrap();
    for t in &mp.terms {
        writeln!(s, "  {} z^{:?}  C = {}  ({})", t.label, t.reduced, t.coefficient, t.potential.series).unwrap();
    }
    s
}

pub fn oracle(verdict: &str, r: &OracleReport) -> String {
    let mut s = String::new();
    writeln!(s, "{verdict}").unwrap();
    writeln!(s, "disk potential   {}", r.disk_potential).unwrap();
    writeln!(s, "oracle potential {}", r.oracle_potential).unwrap();
    if let Some((m, a, b)) = &r.first_difference {
        writeln!(s, "first difference at {m}: {} vs {}", format_q(a), format_q(b)).unwrap();
    }
    s
}
