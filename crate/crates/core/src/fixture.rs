//! Synthetic entertainment-domain world: pages, knowledge base and claims.
//!
//! People star in shows, shows air on networks, networks and people are
//! tied to cities. Supported claims pair related entities; refuted claims
//! usually pair the subject with an unrelated entity of the right type (a
//! distractor), while their gold evidence only talks about the subject.
//! Everything is derived from one seed.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::claims::{write_claims, Claim, Label};
use crate::corpus::{Corpus, Document, SentenceId};
use crate::error::{Error, Result};
use crate::kb::{EntityRecord, KnowledgeBase};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimMix {
    pub supported: usize,
    pub refuted: usize,
    pub nei: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub seed: u64,
    pub people: usize,
    pub shows: usize,
    pub networks: usize,
    pub cities: usize,
    pub train: ClaimMix,
    pub dev: ClaimMix,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            seed: 1,
            people: 80,
            shows: 60,
            networks: 12,
            cities: 20,
            train: ClaimMix {
                supported: 160,
                refuted: 60,
                nei: 60,
            },
            dev: ClaimMix {
                supported: 40,
                refuted: 40,
                nei: 40,
            },
        }
    }
}

pub struct World {
    pub corpus: Corpus,
    pub kb: KnowledgeBase,
    pub train: Vec<Claim>,
    pub dev: Vec<Claim>,
}

impl World {
    /// Writes `wiki/pages.jsonl`, `kb.jsonl`, `train.jsonl` and `dev.jsonl`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let wiki = dir.join("wiki");
        fs::create_dir_all(&wiki).map_err(|e| Error::io(&wiki, e))?;
        self.corpus.write_dump(&wiki.join("pages.jsonl"))?;
        self.kb.write(&dir.join("kb.jsonl"))?;
        write_claims(&dir.join("train.jsonl"), &self.train)?;
        write_claims(&dir.join("dev.jsonl"), &self.dev)
    }
}

const FIRST: [&str; 40] = [
    "Alden", "Mira", "Tobias", "Selene", "Corwin", "Daria", "Emeric", "Fiona", "Gideon", "Helena", "Ivo", "Juno",
    "Kasper", "Lorna", "Magnus", "Nadia", "Orson", "Priya", "Quentin", "Rosalind", "Silas", "Thea", "Ulric", "Vera",
    "Wendell", "Xenia", "Yorick", "Zora", "Anselm", "Bettina", "Cyrus", "Delphine", "Ezra", "Freya", "Gustav", "Hazel",
    "Idris", "Jolene", "Leopold", "Marisol",
];
const LAST: [&str; 40] = [
    "Voss",
    "Kade",
    "Ashby",
    "Brandt",
    "Calloway",
    "Dunmore",
    "Ellery",
    "Fairbanks",
    "Greaves",
    "Holloway",
    "Ingram",
    "Jessop",
    "Kilbride",
    "Lockhart",
    "Mercer",
    "Nyland",
    "Oakes",
    "Pemberton",
    "Quill",
    "Ravensworth",
    "Sterling",
    "Thorne",
    "Underhill",
    "Vance",
    "Whitlock",
    "Yarrow",
    "Zeller",
    "Abernathy",
    "Blackwood",
    "Crane",
    "Darrow",
    "Everly",
    "Fenwick",
    "Garrick",
    "Hale",
    "Irving",
    "Jarvis",
    "Kemble",
    "Lindqvist",
    "Marlow",
];
const SHOW_A: [&str; 30] = [
    "Crimson", "Silver", "Hollow", "Midnight", "Golden", "Broken", "Distant", "Quiet", "Burning", "Frozen", "Velvet",
    "Iron", "Paper", "Hidden", "Wild", "Glass", "Scarlet", "Copper", "Lonely", "Bright", "Stone", "Emerald", "Shadow",
    "Amber", "Winter", "Summer", "Falling", "Rising", "Northern", "Southern",
];
const SHOW_B: [&str; 30] = [
    "Harbor", "Creek", "Empire", "Station", "Orchard", "Avenue", "Kingdom", "Frontier", "Lantern", "Garden", "Horizon",
    "Crossing", "Meadow", "Tower", "Circuit", "Valley", "Bridge", "Island", "Manor", "Canyon", "Signal", "Dynasty",
    "Pines", "Hearts", "Streets", "Tides", "Echoes", "Rivals", "Legacy", "Files",
];
const NET_A: [&str; 20] = [
    "Northwind",
    "Halcyon",
    "Meridian",
    "Bluecrest",
    "Orbit",
    "Pinnacle",
    "Sable",
    "Crescent",
    "Vanguard",
    "Atlas",
    "Beacon",
    "Zenith",
    "Harmony",
    "Summit",
    "Aurora",
    "Keystone",
    "Liberty",
    "Monarch",
    "Paragon",
    "Solstice",
];
const NET_B: [&str; 4] = ["Network", "Television", "Broadcasting", "Channel"];
const CITY_A: [&str; 8] = ["Port", "North", "East", "West", "New", "Lake", "Fort", "Mount"];
const CITY_B: [&str; 10] = [
    "Elms", "Vale", "Haven", "Ridge", "Brook", "Falls", "Hollow", "Crossing", "Harbour", "Field",
];
const GENRES: [&str; 2] = ["sitcom", "drama"];
const NATIONALITY: [&str; 4] = ["American", "British", "Canadian", "Australian"];
const ROLES: [&str; 8] = [
    "a detective",
    "a doctor",
    "a lawyer",
    "a teacher",
    "a pilot",
    "a journalist",
    "a chef",
    "a senator",
];

struct Person {
    id: String,
    name: String,
    he: &'static str,
    born: usize,
    /// (show index, line on the person page)
    credits: Vec<(usize, u32)>,
    lines: Vec<String>,
}

struct Show {
    id: String,
    name: String,
    genre: usize,
    network: usize,
    city: usize,
    cast: Vec<usize>,
}

struct Network {
    id: String,
    name: String,
    city: usize,
}

struct City {
    id: String,
    name: String,
}

fn pick_names(rng: &mut ChaCha8Rng, a: &[&str], b: &[&str], n: usize) -> Vec<String> {
    let mut all: Vec<String> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| format!("{x} {y}")))
        .collect();
    all.shuffle(rng);
    // avoid reusing a first word so names stay distinguishable
    let mut used = HashSet::new();
    let mut out = Vec::new();
    for name in all {
        let first = name.split(' ').next().unwrap_or("").to_string();
        if a.len() >= n && !used.insert(first) {
            continue;
        }
        out.push(name);
        if out.len() == n {
            break;
        }
    }
    out
}

pub fn generate_world(config: &WorldConfig) -> Result<World> {
    if config.people < 4 || config.shows < 4 || config.networks < 3 || config.cities < 3 {
        return Err(Error::Config(
            "world needs at least 4 people, 4 shows, 3 networks and 3 cities".into(),
        ));
    }
    if config.networks > NET_A.len() || config.cities > CITY_A.len() * CITY_B.len() {
        return Err(Error::Config("world is larger than the name pools".into()));
    }
    let mut rng = seeded(derive_seed(config.seed, 0xF1C7));

    let cities: Vec<City> = pick_names(&mut rng, &CITY_A, &CITY_B, config.cities)
        .into_iter()
        .enumerate()
        .map(|(i, name)| City {
            id: format!("C{i:03}"),
            name,
        })
        .collect();
    let networks: Vec<Network> = pick_names(&mut rng, &NET_A, &NET_B, config.networks)
        .into_iter()
        .enumerate()
        .map(|(i, name)| Network {
            id: format!("N{i:03}"),
            name,
            city: rng.gen_range(0..config.cities),
        })
        .collect();
    let mut shows: Vec<Show> = pick_names(&mut rng, &SHOW_A, &SHOW_B, config.shows)
        .into_iter()
        .enumerate()
        .map(|(i, name)| Show {
            id: format!("S{i:03}"),
            name,
            genre: rng.gen_range(0..GENRES.len()),
            network: rng.gen_range(0..config.networks),
            city: rng.gen_range(0..config.cities),
            cast: Vec::new(),
        })
        .collect();
    let mut people: Vec<Person> = pick_names(&mut rng, &FIRST, &LAST, config.people)
        .into_iter()
        .enumerate()
        .map(|(i, name)| Person {
            id: format!("P{i:03}"),
            name,
            he: if rng.gen_bool(0.5) { "He" } else { "She" },
            born: rng.gen_range(0..config.cities),
            credits: Vec::new(),
            lines: Vec::new(),
        })
        .collect();

    // every person gets one or two shows
    for (p, person) in people.iter_mut().enumerate() {
        let n = if rng.gen_bool(0.4) { 2 } else { 1 };
        let mut picks: Vec<usize> = (0..shows.len()).collect();
        picks.shuffle(&mut rng);
        for &s in picks.iter().take(n) {
            shows[s].cast.push(p);
            person.credits.push((s, 0));
        }
    }

    let mut docs = Vec::new();

    for p in &mut people {
        let mut lines = vec![format!(
            "{} is an {} actor born in {}.",
            p.name,
            NATIONALITY[rng.gen_range(0..NATIONALITY.len())],
            cities[p.born].name
        )];
        for credit in &mut p.credits {
            credit.1 = lines.len() as u32;
            let show = &shows[credit.0].name;
            let role = ROLES[rng.gen_range(0..ROLES.len())];
            lines.push(match rng.gen_range(0..3) {
                0 => format!("{} starred in {} as {}.", p.he, show, role),
                1 => format!("{} played {} in {}.", p.he, role, show),
                _ => format!("{} is best known for playing {} on {}.", p.he, role, show),
            });
        }
        let fillers = [
            format!("{} studied drama at a local college.", p.he),
            format!("{} began acting at a young age.", p.he),
            format!("{} has appeared in several stage productions.", p.he),
            format!("{} lives with two dogs.", p.he),
        ];
        let mut idx: Vec<usize> = (0..fillers.len()).collect();
        idx.shuffle(&mut rng);
        for &i in idx.iter().take(2) {
            lines.push(fillers[i].clone());
        }
        p.lines = lines.clone();
        docs.push(Document::from_texts(p.name.clone(), &lines));
    }

    for s in &shows {
        let cast: Vec<&str> = s.cast.iter().map(|&p| people[p].name.as_str()).collect();
        let mut lines = vec![
            format!("{} is a {} television series.", s.name, GENRES[s.genre]),
            format!(
                "{} aired on {} for {} seasons.",
                s.name,
                networks[s.network].name,
                rng.gen_range(1..9)
            ),
        ];
        lines.push(match cast.len() {
            0 => "The series featured a rotating cast.".to_string(),
            1 => format!("The series starred {}.", cast[0]),
            _ => format!(
                "The series starred {} and {}.",
                cast[..cast.len() - 1].join(", "),
                cast[cast.len() - 1]
            ),
        });
        lines.push(format!("It was filmed in {}.", cities[s.city].name));
        lines.push("The show received mixed reviews from critics.".to_string());
        docs.push(Document::from_texts(s.name.clone(), &lines));
    }

    for (n, net) in networks.iter().enumerate() {
        let aired: Vec<&str> = shows
            .iter()
            .filter(|s| s.network == n)
            .take(2)
            .map(|s| s.name.as_str())
            .collect();
        let mut lines = vec![format!(
            "{} is a broadcaster based in {}.",
            net.name, cities[net.city].name
        )];
        if !aired.is_empty() {
            lines.push(format!(
                "{} airs many shows, including {}.",
                net.name,
                aired.join(" and ")
            ));
        }
        lines.push(format!("{} was founded in {}.", net.name, rng.gen_range(1930..2000)));
        lines.push("Its programming includes news, sports and drama shows.".to_string());
        docs.push(Document::from_texts(net.name.clone(), &lines));
    }

    for (c, city) in cities.iter().enumerate() {
        let mut lines = vec![format!("{} is a city.", city.name)];
        for net in networks.iter().filter(|n| n.city == c) {
            lines.push(format!("{} is home to {}.", city.name, net.name));
        }
        lines.push(format!("Several television shows were filmed in {}.", city.name));
        docs.push(Document::from_texts(city.name.clone(), &lines));
    }

    let topics: [(&str, &[&str]); 8] = [
        (
            "Television series",
            &[
                "A television series is a set of episodes.",
                "Many shows are broadcast on a network.",
                "Series are often filmed in a studio.",
            ],
        ),
        (
            "Sitcom",
            &[
                "A sitcom is a comedy series.",
                "Sitcoms are often filmed before an audience.",
                "Many actors began their careers in sitcoms.",
            ],
        ),
        (
            "Drama (genre)",
            &[
                "Drama is a genre of fiction.",
                "Television drama shows are popular.",
                "Actors in drama series often play a doctor or a lawyer.",
            ],
        ),
        (
            "Broadcasting",
            &[
                "Broadcasting is the distribution of audio or video content.",
                "A broadcaster airs shows to an audience.",
                "Broadcasters are often based in large cities.",
            ],
        ),
        (
            "Acting",
            &[
                "Acting is an activity in which a story is told by an actor.",
                "An actor may star in shows, films and plays.",
                "Many actors studied drama at college.",
            ],
        ),
        (
            "Casting (performing arts)",
            &[
                "Casting is the process of selecting actors for roles.",
                "A show may change its cast between seasons.",
            ],
        ),
        (
            "Television network",
            &[
                "A television network distributes programs.",
                "Networks air many shows including news and sports.",
            ],
        ),
        (
            "Film festival",
            &[
                "A film festival is an organized presentation of films.",
                "Festivals are often held in a city.",
            ],
        ),
    ];
    for (title, lines) in topics {
        let lines: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
        docs.push(Document::from_texts(title, &lines));
    }

    let corpus = Corpus::from_documents(docs)?;

    let mut records = Vec::new();
    for p in &people {
        let mut relations: Vec<String> = p.credits.iter().map(|&(s, _)| shows[s].id.clone()).collect();
        relations.push(cities[p.born].id.clone());
        records.push(EntityRecord {
            entity_id: p.id.clone(),
            canonical_name: p.name.clone(),
            aliases: vec![p.name.clone()],
            parent_ids: vec!["class:actor".into()],
            relation_ids: relations,
        });
    }
    for s in &shows {
        records.push(EntityRecord {
            entity_id: s.id.clone(),
            canonical_name: s.name.clone(),
            aliases: vec![s.name.clone()],
            parent_ids: vec![format!("class:{}", GENRES[s.genre])],
            relation_ids: vec![networks[s.network].id.clone(), cities[s.city].id.clone()],
        });
    }
    for n in &networks {
        records.push(EntityRecord {
            entity_id: n.id.clone(),
            canonical_name: n.name.clone(),
            aliases: vec![n.name.clone()],
            parent_ids: vec!["class:broadcaster".into()],
            relation_ids: vec![cities[n.city].id.clone()],
        });
    }
    for c in &cities {
        records.push(EntityRecord {
            entity_id: c.id.clone(),
            canonical_name: c.name.clone(),
            aliases: vec![c.name.clone()],
            parent_ids: vec!["class:city".into()],
            relation_ids: Vec::new(),
        });
    }
    let kb = KnowledgeBase::from_records(records)?;

    let world = ClaimWriter {
        people: &people,
        shows: &shows,
        networks: &networks,
        cities: &cities,
    };
    let mut seen = BTreeSet::new();
    let train = world.claims(&mut rng, config.train, 1, &mut seen);
    let dev = world.claims(&mut rng, config.dev, 100_001, &mut seen);

    Ok(World { corpus, kb, train, dev })
}

struct ClaimWriter<'a> {
    people: &'a [Person],
    shows: &'a [Show],
    networks: &'a [Network],
    cities: &'a [City],
}

impl ClaimWriter<'_> {
    fn person_credit(&self, rng: &mut ChaCha8Rng) -> (&Person, usize, u32) {
        let p = &self.people[rng.gen_range(0..self.people.len())];
        let (s, line) = p.credits[rng.gen_range(0..p.credits.len())];
        (p, s, line)
    }

    fn supported(&self, rng: &mut ChaCha8Rng) -> (String, Vec<Vec<SentenceId>>) {
        match rng.gen_range(0..10) {
            0..=4 => {
                let (p, s, line) = self.person_credit(rng);
                let show = &self.shows[s];
                let verb = ["starred in", "acted in", "appeared in"][rng.gen_range(0..3)];
                (
                    format!("{} {} {}.", p.name, verb, show.name),
                    vec![vec![SentenceId::new(&p.name, line)]],
                )
            }
            5..=6 => {
                let show = &self.shows[rng.gen_range(0..self.shows.len())];
                (
                    format!("{} aired on {}.", show.name, self.networks[show.network].name),
                    vec![vec![SentenceId::new(&show.name, 1)]],
                )
            }
            7 => {
                let p = &self.people[rng.gen_range(0..self.people.len())];
                (
                    format!("{} was born in {}.", p.name, self.cities[p.born].name),
                    vec![vec![SentenceId::new(&p.name, 0)]],
                )
            }
            8 => {
                let show = &self.shows[rng.gen_range(0..self.shows.len())];
                (
                    format!("{} was filmed in {}.", show.name, self.cities[show.city].name),
                    vec![vec![SentenceId::new(&show.name, 3)]],
                )
            }
            _ => {
                let p = &self.people[rng.gen_range(0..self.people.len())];
                (
                    format!("{} is an actor.", p.name),
                    vec![vec![SentenceId::new(&p.name, 0)]],
                )
            }
        }
    }

    fn refuted(&self, rng: &mut ChaCha8Rng) -> (String, Vec<Vec<SentenceId>>) {
        match rng.gen_range(0..10) {
            0..=2 => {
                let (p, _, line) = self.person_credit(rng);
                let own: HashSet<usize> = p.credits.iter().map(|&(s, _)| self.shows[s].network).collect();
                let others: Vec<usize> = (0..self.networks.len()).filter(|n| !own.contains(n)).collect();
                let n = others[rng.gen_range(0..others.len())];
                (
                    format!("{} is only in shows on {}.", p.name, self.networks[n].name),
                    vec![vec![SentenceId::new(&p.name, line)]],
                )
            }
            3..=5 => {
                let (p, _, line) = self.person_credit(rng);
                let own: HashSet<usize> = p.credits.iter().map(|&(s, _)| s).collect();
                let s = loop {
                    let s = rng.gen_range(0..self.shows.len());
                    if !own.contains(&s) {
                        break s;
                    }
                };
                let verb = ["starred in", "acted in", "appeared in"][rng.gen_range(0..3)];
                (
                    format!("{} {} {}.", p.name, verb, self.shows[s].name),
                    vec![vec![SentenceId::new(&p.name, line)]],
                )
            }
            6..=7 => {
                let show = &self.shows[rng.gen_range(0..self.shows.len())];
                let n = loop {
                    let n = rng.gen_range(0..self.networks.len());
                    if n != show.network {
                        break n;
                    }
                };
                (
                    format!("{} aired on {}.", show.name, self.networks[n].name),
                    vec![vec![SentenceId::new(&show.name, 1)]],
                )
            }
            8 => {
                let p = &self.people[rng.gen_range(0..self.people.len())];
                let c = loop {
                    let c = rng.gen_range(0..self.cities.len());
                    if c != p.born {
                        break c;
                    }
                };
                (
                    format!("{} was born in {}.", p.name, self.cities[c].name),
                    vec![vec![SentenceId::new(&p.name, 0)]],
                )
            }
            _ => {
                let (p, _, line) = self.person_credit(rng);
                (
                    format!("{} has never acted on television.", p.name),
                    vec![vec![SentenceId::new(&p.name, line)]],
                )
            }
        }
    }

    fn nei(&self, rng: &mut ChaCha8Rng) -> String {
        let p = &self.people[rng.gen_range(0..self.people.len())];
        let show = &self.shows[rng.gen_range(0..self.shows.len())];
        let city = &self.cities[rng.gen_range(0..self.cities.len())];
        match rng.gen_range(0..4) {
            0 => format!("{} owns a restaurant in {}.", p.name, city.name),
            1 => format!("{} was remade as a film.", show.name),
            2 => format!("{} has a twin brother.", p.name),
            _ => format!("{} won an award for its soundtrack.", show.name),
        }
    }

    fn claims(&self, rng: &mut ChaCha8Rng, mix: ClaimMix, first_id: u64, seen: &mut BTreeSet<String>) -> Vec<Claim> {
        let mut labels: Vec<Label> = std::iter::repeat_n(Label::Supported, mix.supported)
            .chain(std::iter::repeat_n(Label::Refuted, mix.refuted))
            .chain(std::iter::repeat_n(Label::NotEnoughInfo, mix.nei))
            .collect();
        labels.shuffle(rng);
        let mut out = Vec::with_capacity(labels.len());
        for (i, label) in labels.into_iter().enumerate() {
            let mut attempts = 0;
            let (text, evidence) = loop {
                let (text, evidence) = match label {
                    Label::Supported => self.supported(rng),
                    Label::Refuted => self.refuted(rng),
                    Label::NotEnoughInfo => (self.nei(rng), Vec::new()),
                };
                attempts += 1;
                if seen.insert(text.clone()) || attempts > 50 {
                    break (text, evidence);
                }
            };
            out.push(Claim {
                id: first_id + i as u64,
                label,
                text,
                evidence,
            });
        }
        out
    }
}

/// Relation lookup used by tests: which show ids a person starred in.
pub fn credits_by_person(kb: &KnowledgeBase) -> BTreeMap<String, Vec<String>> {
    kb.entities()
        .filter(|e| e.parent_ids.iter().any(|p| p == "class:actor"))
        .map(|e| {
            let shows = e.relation_ids.iter().filter(|r| r.starts_with('S')).cloned().collect();
            (e.entity_id.clone(), shows)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_is_consistent_and_deterministic() {
        let config = WorldConfig::default();
        let w = generate_world(&config).unwrap();
        assert_eq!(w.corpus.len(), 80 + 60 + 12 + 20 + 8);
        assert_eq!(w.train.len(), 280);
        assert_eq!(w.dev.len(), 120);
        for c in w.train.iter().chain(&w.dev) {
            for id in c.evidence.iter().flatten() {
                assert!(w.corpus.get_sentence(id).is_some(), "claim {} cites missing {id}", c.id);
            }
            assert_eq!(c.label == Label::NotEnoughInfo, c.evidence.is_empty());
        }
        let again = generate_world(&config).unwrap();
        assert_eq!(again.corpus, w.corpus);
        assert_eq!(again.dev, w.dev);
        let other = generate_world(&WorldConfig { seed: 2, ..config }).unwrap();
        assert_ne!(other.dev, w.dev);
    }

    #[test]
    fn every_person_has_a_credit() {
        let w = generate_world(&WorldConfig::default()).unwrap();
        assert!(credits_by_person(&w.kb).values().all(|s| !s.is_empty()));
    }
}
