//! Shared fixtures: a plain-data corpus description, random generators and a
//! brute-force evaluator written straight from the indicator's definition.
//! Nothing here calls into the library's computation paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hcarank::ingest::Corpus;
use hcarank::{
    AssessmentConfig, AuthorSlot, BylineConvention, FieldTaxonomy, PublicationRecord, Researcher, Roster,
    SalarySchedule,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const RANKS: [&str; 3] = ["assistant", "associate", "full"];

#[derive(Debug, Clone)]
pub struct Slot {
    pub university: Option<String>,
    pub researcher: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Pub {
    pub id: String,
    pub year: i32,
    pub doc_type: String,
    pub citations: u64,
    pub categories: Vec<String>,
    pub byline: Vec<Slot>,
}

#[derive(Debug, Clone)]
pub struct Person {
    pub id: String,
    pub university: String,
    pub sds: String,
    pub years: Vec<(i32, String)>,
}

#[derive(Debug, Clone)]
pub struct Field {
    pub sds: String,
    pub uda: String,
    pub position_weighted: bool,
}

#[derive(Debug, Clone)]
pub struct Desk {
    pub pubs: Vec<Pub>,
    pub people: Vec<Person>,
    pub fields: Vec<Field>,
    pub salaries: Vec<(String, f64)>,
}

impl Desk {
    pub fn to_corpus(&self, config: &AssessmentConfig) -> Corpus {
        let pubs = self
            .pubs
            .iter()
            .map(|p| {
                let byline = p
                    .byline
                    .iter()
                    .enumerate()
                    .map(|(i, s)| AuthorSlot::new(i as u32 + 1, s.university.clone(), s.researcher.clone()).unwrap())
                    .collect();
                PublicationRecord::new(&p.id, p.year, &p.doc_type, p.citations, p.categories.clone(), byline).unwrap()
            })
            .collect();
        let roster = Roster::new(self.people.iter().map(|r| {
            Researcher::new(&r.id, &r.university, &r.sds, r.years.iter().cloned().collect()).unwrap()
        }))
        .unwrap();
        let taxonomy = FieldTaxonomy::new(self.fields.iter().map(|f| {
            let conv = if f.position_weighted {
                BylineConvention::PositionWeighted
            } else {
                BylineConvention::Alphabetical
            };
            (f.sds.clone(), f.uda.clone(), conv)
        }))
        .unwrap();
        let salaries = SalarySchedule::new(self.salaries.clone()).unwrap();
        Corpus::assemble(pubs, roster, taxonomy, salaries, config).unwrap().0
    }

    pub fn with_salaries(&self, salaries: Vec<(String, f64)>) -> Desk {
        Desk { salaries, ..self.clone() }
    }

    /// Writes the five input CSV files; rows are shuffled when `rng` is given.
    pub fn write_csv(&self, dir: &Path, mut rng: Option<&mut ChaCha8Rng>) {
        let mut shuffle = |lines: &mut Vec<String>| {
            if let Some(r) = rng.as_deref_mut() {
                lines.shuffle(r);
            }
        };
        let mut pubs: Vec<String> = self
            .pubs
            .iter()
            .map(|p| format!("{},{},{},{},{}", p.id, p.year, p.doc_type, p.citations, p.categories.join(";")))
            .collect();
        let mut authors: Vec<String> = self
            .pubs
            .iter()
            .flat_map(|p| {
                p.byline.iter().enumerate().map(move |(i, s)| {
                    format!(
                        "{},{},{},{}",
                        p.id,
                        i + 1,
                        s.university.as_deref().unwrap_or(""),
                        s.researcher.as_deref().unwrap_or("")
                    )
                })
            })
            .collect();
        let mut people: Vec<String> = self
            .people
            .iter()
            .flat_map(|r| r.years.iter().map(move |(y, k)| format!("{},{},{},{},{}", r.id, r.university, r.sds, y, k)))
            .collect();
        let mut fields: Vec<String> = self
            .fields
            .iter()
            .map(|f| {
                let conv = if f.position_weighted { "position_weighted" } else { "alphabetical" };
                format!("{},{},{}", f.sds, f.uda, conv)
            })
            .collect();
        let mut salaries: Vec<String> = self.salaries.iter().map(|(r, s)| format!("{r},{s}")).collect();
        shuffle(&mut pubs);
        shuffle(&mut authors);
        shuffle(&mut people);
        shuffle(&mut fields);
        shuffle(&mut salaries);
        let write = |name: &str, header: &str, lines: &[String]| {
            let mut text = String::with_capacity(lines.len() * 32);
            text.push_str(header);
            text.push('\n');
            for l in lines {
                writeln!(text, "{l}").unwrap();
            }
            fs::write(dir.join(name), text).unwrap();
        };
        write("publications.csv", "pub_id,year,doc_type,citations,categories", &pubs);
        write("authorship.csv", "pub_id,position,university_id,researcher_id", &authors);
        write("researchers.csv", "researcher_id,university_id,sds,year,rank", &people);
        write("taxonomy.csv", "sds,uda,convention", &fields);
        write("salaries.csv", "rank,avg_salary", &salaries);
    }
}

/// Random corpus with at most 4 universities, 3 fields and 20 publications.
pub fn desk_corpus(rng: &mut ChaCha8Rng) -> Desk {
    let n_uni = rng.gen_range(1..=4);
    let n_sds = rng.gen_range(1..=3);
    let fields: Vec<Field> = (0..n_sds)
        .map(|s| Field {
            sds: format!("S{s}"),
            uda: format!("D{}", rng.gen_range(0..2)),
            position_weighted: rng.gen_bool(0.5),
        })
        .collect();
    let mut people = Vec::new();
    for u in 0..n_uni {
        for f in &fields {
            for k in 0..rng.gen_range(0..=3) {
                let mut years = Vec::new();
                for y in 2006..=2014 {
                    if rng.gen_bool(0.6) {
                        years.push((y, RANKS[rng.gen_range(0..3)].to_string()));
                    }
                }
                if years.is_empty() {
                    years.push((2010, "full".to_string()));
                }
                people.push(Person {
                    id: format!("r{u}_{}_{k}", f.sds),
                    university: format!("U{u}"),
                    sds: f.sds.clone(),
                    years,
                });
            }
        }
    }
    let cats = ["C0", "C1"];
    let n_pubs = rng.gen_range(0..=20);
    let pubs = (0..n_pubs)
        .map(|i| {
            let n_cats = rng.gen_range(1..=2);
            let mut cs: Vec<String> = cats.choose_multiple(rng, n_cats).map(|c| c.to_string()).collect();
            cs.sort();
            let n_auth = rng.gen_range(1..=8);
            let byline = (0..n_auth)
                .map(|_| {
                    if !people.is_empty() && rng.gen_bool(0.6) {
                        let p = people.choose(rng).unwrap();
                        Slot {
                            university: Some(p.university.clone()),
                            researcher: Some(p.id.clone()),
                        }
                    } else if rng.gen_bool(0.5) {
                        Slot {
                            university: Some(format!("U{}", rng.gen_range(0..n_uni + 1))),
                            researcher: None,
                        }
                    } else {
                        Slot {
                            university: None,
                            researcher: None,
                        }
                    }
                })
                .collect();
            Pub {
                id: format!("p{i:03}"),
                // one out-of-window year keeps the window filter exercised
                year: if rng.gen_bool(0.1) { 2013 } else { rng.gen_range(2008..=2009) },
                doc_type: "article".to_string(),
                citations: rng.gen_range(0..15),
                categories: cs,
                byline,
            }
        })
        .collect();
    let salaries = RANKS
        .iter()
        .map(|r| (r.to_string(), rng.gen_range(30_000.0..90_000.0)))
        .collect();
    Desk {
        pubs,
        people,
        fields,
        salaries,
    }
}

/// Config for desk-scale runs: every unit with one researcher is eligible.
pub fn desk_config() -> AssessmentConfig {
    AssessmentConfig {
        min_staff_sds: 1,
        min_staff_uda: 1,
        min_staff_overall: 1,
        ..AssessmentConfig::default()
    }
}

/// Corpus of roughly `n_pubs` publications in the style of a national
/// dataset: many universities, fields grouped in disciplines, mixed bylines.
pub fn large_corpus(rng: &mut ChaCha8Rng, n_pubs: usize) -> Desk {
    let n_uni = 40;
    let fields: Vec<Field> = (0..30)
        .map(|s| Field {
            sds: format!("SDS{s:02}"),
            uda: format!("{}", s % 6 + 1),
            position_weighted: s % 6 >= 4,
        })
        .collect();
    let mut people = Vec::new();
    for u in 0..n_uni {
        for f in &fields {
            let size = rng.gen_range(0..12);
            for k in 0..size {
                let start = rng.gen_range(2004..=2012);
                let end = rng.gen_range(start..=2015);
                let mut rank = rng.gen_range(0..3);
                let mut years = Vec::new();
                for y in start..=end {
                    if rank < 2 && rng.gen_bool(0.1) {
                        rank += 1;
                    }
                    years.push((y, RANKS[rank].to_string()));
                }
                people.push(Person {
                    id: format!("R{u:02}{}{k:02}", f.sds),
                    university: format!("UNIV_{u:02}"),
                    sds: f.sds.clone(),
                    years,
                });
            }
        }
    }
    let cats: Vec<String> = (0..60).map(|c| format!("CAT{c:02}")).collect();
    let doc_types = ["article", "article", "article", "review", "letter", "editorial material", "meeting abstract"];
    let pubs = (0..n_pubs)
        .map(|i| {
            let n_cats = if rng.gen_bool(0.7) { 1 } else { rng.gen_range(2..=3) };
            let mut cs: Vec<String> = cats.choose_multiple(rng, n_cats).cloned().collect();
            cs.sort();
            let n_auth = rng.gen_range(1..=12);
            let byline = (0..n_auth)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        let p = people.choose(rng).unwrap();
                        Slot {
                            university: Some(p.university.clone()),
                            researcher: Some(p.id.clone()),
                        }
                    } else {
                        Slot {
                            university: Some(format!("EXT_{}", rng.gen_range(0..500))),
                            researcher: None,
                        }
                    }
                })
                .collect();
            // heavy-tailed citation counts
            let u: f64 = rng.gen_range(0.0..1.0);
            let citations = (3.0 / (1.0 - u).powf(0.6) - 3.0) as u64;
            Pub {
                id: format!("WOS{i:07}"),
                year: rng.gen_range(2007..=2013),
                doc_type: doc_types.choose(rng).unwrap().to_string(),
                citations,
                categories: cs,
                byline,
            }
        })
        .collect();
    let salaries = vec![
        ("assistant".to_string(), 38_000.0),
        ("associate".to_string(), 52_000.0),
        ("full".to_string(), 74_000.0),
    ];
    Desk {
        pubs,
        people,
        fields,
        salaries,
    }
}

// ---------------------------------------------------------------------------
// Brute-force evaluator
// ---------------------------------------------------------------------------

/// Byline weights written out case by case.
pub fn oracle_weights(n: usize, position_weighted: bool, same_ends: bool) -> Vec<f64> {
    if !position_weighted {
        return vec![1.0 / n as f64; n];
    }
    match (n, same_ends) {
        (1, _) => vec![1.0],
        (2, _) => vec![0.5, 0.5],
        (3, true) => vec![0.4, 0.2, 0.4],
        (3, false) => vec![1.0 / 3.0; 3],
        (4, false) => vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0],
        (_, true) => (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.4 } else { 0.2 / (n - 2) as f64 })
            .collect(),
        (_, false) => (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    0.3
                } else if i == 1 || i == n - 2 {
                    0.15
                } else {
                    0.1 / (n - 4) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Default)]
pub struct OracleScores {
    pub hca: BTreeSet<String>,
    pub sds: BTreeMap<(String, String), f64>,
    pub uda: BTreeMap<(String, String), f64>,
    pub overall: BTreeMap<String, f64>,
}

pub fn oracle(desk: &Desk, config: &AssessmentConfig) -> OracleScores {
    let window = config.window;
    let in_window = |y: i32| y >= window.start && y <= window.end;
    let pubs: Vec<&Pub> = desk
        .pubs
        .iter()
        .filter(|p| config.doc_type_whitelist.contains(&p.doc_type.to_lowercase()) && in_window(p.year))
        .collect();
    let person = |id: &str| desk.people.iter().find(|r| r.id == id);
    let active = |r: &Person| r.years.iter().any(|(y, _)| in_window(*y));
    let field = |sds: &str| desk.fields.iter().find(|f| f.sds == sds).unwrap();

    // coverage
    let mut assessed = BTreeSet::new();
    for f in &desk.fields {
        let staff: Vec<&Person> = desk.people.iter().filter(|r| r.sds == f.sds && active(r)).collect();
        if staff.is_empty() {
            continue;
        }
        let publishing = staff
            .iter()
            .filter(|r| pubs.iter().any(|p| p.byline.iter().any(|s| s.researcher.as_deref() == Some(r.id.as_str()))))
            .count();
        if publishing as f64 / staff.len() as f64 >= config.sds_coverage_min {
            assessed.insert(f.sds.clone());
        }
    }

    // highly-cited articles
    let mut out = OracleScores::default();
    for p in &pubs {
        let mut total = 0.0;
        for c in &p.categories {
            let cohort: Vec<&&Pub> = pubs.iter().filter(|q| q.year == p.year && q.categories.contains(c)).collect();
            let below = cohort.iter().filter(|q| q.citations < p.citations).count();
            total += 100.0 * below as f64 / cohort.len() as f64;
        }
        if total / p.categories.len() as f64 >= 100.0 * (1.0 - config.hca_top_fraction) - 1e-9 {
            out.hca.insert(p.id.clone());
        }
    }

    // field scores
    let salary = |rank: &str| desk.salaries.iter().find(|(r, _)| r == rank).unwrap().1;
    let mut cost: BTreeMap<(String, String), f64> = BTreeMap::new();
    for r in desk.people.iter().filter(|r| assessed.contains(&r.sds) && active(r)) {
        let c: f64 = r
            .years
            .iter()
            .filter(|(y, _)| in_window(*y))
            .map(|(_, k)| match config.cost_mode {
                hcarank::CostMode::Salary => salary(k),
                hcarank::CostMode::YearsOnly => 1.0,
            })
            .sum();
        *cost.entry((r.university.clone(), r.sds.clone())).or_insert(0.0) += c;
    }
    for ((u, s), w) in &cost {
        let pw = field(s).position_weighted;
        let mut credit = 0.0;
        for p in pubs.iter().filter(|p| out.hca.contains(&p.id)) {
            let n = p.byline.len();
            let same = matches!(
                (&p.byline[0].university, &p.byline[n - 1].university),
                (Some(a), Some(b)) if a == b
            );
            let weights = oracle_weights(n, pw, same);
            for (i, slot) in p.byline.iter().enumerate() {
                if let Some(r) = slot.researcher.as_deref().and_then(person) {
                    if &r.university == u && &r.sds == s {
                        credit += weights[i];
                    }
                }
            }
        }
        out.sds.insert((u.clone(), s.clone()), config.multiplier * credit / w);
    }

    // national averages over universities with positive scores
    let mut avg: BTreeMap<String, f64> = BTreeMap::new();
    for s in &assessed {
        let (mut num, mut den) = (0.0, 0.0);
        for (key, score) in &out.sds {
            if &key.1 == s && *score > 0.0 {
                let w = cost[key];
                num += w * score;
                den += w;
            }
        }
        if den > 0.0 {
            avg.insert(s.clone(), num / den);
        }
    }

    let universities: BTreeSet<&String> = cost.keys().map(|(u, _)| u).collect();
    let udas: BTreeSet<&String> = desk.fields.iter().map(|f| &f.uda).collect();
    for u in universities {
        let fold = |keep: &dyn Fn(&str) -> bool| {
            let w_u: f64 = cost.iter().filter(|((u2, s), _)| u2 == u && keep(s)).map(|(_, w)| w).sum();
            if w_u == 0.0 {
                return None;
            }
            let mut total = 0.0;
            for ((u2, s), w) in &cost {
                if u2 == u && keep(s) {
                    if let Some(a) = avg.get(s) {
                        total += out.sds[&(u2.clone(), s.clone())] / a * (w / w_u);
                    }
                }
            }
            Some(total)
        };
        for d in &udas {
            if let Some(v) = fold(&|s: &str| &field(s).uda == *d) {
                out.uda.insert((u.clone(), d.to_string()), v);
            }
        }
        if let Some(v) = fold(&|_: &str| true) {
            out.overall.insert(u.clone(), v);
        }
    }
    out
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
