//! Seeded synthetic tweet generator.
//!
//! Balance is exact rather than statistical:
//! - gender alternates by tweet index (male on even indices);
//! - the date range is cut into `count` equal strata, tweet `i` lands in
//!   stratum `i`;
//! - x and y each use an independent seeded permutation of the same strata.
//!
//! Each value is uniform inside its stratum, so the marginals are uniform
//! over the query domains and every equal-width bin holds its share of tweets.

use std::sync::OnceLock;

use chrono::DateTime;

use super::{
    date_max, date_min, Author, Gender, GeoPoint, ScaleFactor, TweetRecord, AGE_RANGE,
    GEO_X_RANGE, GEO_Y_RANGE,
};
use crate::error::{Error, Result};
use crate::preprocess;
use crate::rng::{mix, SplitMix64};

const TEMPLATES: &str = include_str!("../../data/templates.txt");

/// Tweet ids start here and grow with the tweet index.
const TWEET_ID_BASE: u64 = 644_000_000_000_000_000;
const AUTHOR_ID_BASE: u64 = 900_000_000;
/// Average number of tweets per generated author.
const TWEETS_PER_AUTHOR: u64 = 4;

fn templates() -> &'static [&'static str] {
    static BANK: OnceLock<Vec<&'static str>> = OnceLock::new();
    BANK.get_or_init(|| {
        TEMPLATES
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Number of templates in the embedded bank.
pub fn template_count() -> usize {
    templates().len()
}

const MALE_NAMES: &[&str] = &[
    "James", "John", "Robert", "Michael", "William", "David", "Richard", "Joseph", "Thomas",
    "Charles", "Daniel", "Matthew", "Anthony", "Mark", "Paul", "Steven", "Andrew", "Joshua",
    "Kevin", "Brian", "George", "Edward", "Ryan", "Jacob", "Gary", "Eric", "Jonathan", "Adrian",
    "Stefan", "Lucas", "Hugo", "Mateo",
];

const FEMALE_NAMES: &[&str] = &[
    "Mary", "Patricia", "Jennifer", "Linda", "Elizabeth", "Barbara", "Susan", "Jessica",
    "Sarah", "Karen", "Nancy", "Lisa", "Betty", "Margaret", "Sandra", "Ashley", "Emily", "Donna",
    "Michelle", "Amanda", "Melissa", "Deborah", "Laura", "Rebecca", "Sharon", "Cynthia", "Ioana",
    "Elena", "Chloe", "Emma", "Lea", "Sofia",
];

const LAST_NAMES: &[&str] = &[
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller", "Davis", "Rodriguez",
    "Martinez", "Hernandez", "Lopez", "Gonzalez", "Wilson", "Anderson", "Taylor", "Moore",
    "Jackson", "Martin", "Lee", "Thompson", "White", "Harris", "Clark", "Lewis", "Robinson",
    "Walker", "Young", "Allen", "King", "Popescu", "Ionescu", "Dubois", "Moreau", "Laurent",
    "Bernard",
];

const NOUNS: &[&str] = &[
    "car", "coffee", "game", "movie", "music", "song", "phone", "city", "team", "weather",
    "traffic", "pizza", "book", "school", "job", "friend", "party", "concert", "beach", "dog",
    "cat", "house", "road", "train", "flight", "storm", "rain", "weekend", "holiday", "birthday",
    "election", "debate", "president", "market", "price", "ticket", "show", "season", "episode",
    "class", "exam", "teacher", "student", "office", "meeting", "project", "deadline", "laptop",
    "camera", "picture", "video", "burger", "taco", "salad", "breakfast", "lunch", "dinner",
    "restaurant", "bar", "club", "festival", "goal", "match", "player", "coach", "stadium",
    "league", "score", "fan", "crowd", "street", "bridge", "park", "river", "mountain", "lake",
    "hotel", "airport", "bus", "subway", "bike", "shoe", "shirt", "jacket", "dress", "gift",
    "headache", "doctor", "hospital", "gym", "workout", "dream", "idea", "plan", "story", "joke",
    "app", "update", "battery", "charger", "screen", "website", "podcast", "album", "band",
    "guitar", "museum", "library", "garden", "kitchen", "couch", "window", "night", "week",
];

const PLURAL_NOUNS: &[&str] = &[
    "cars", "games", "movies", "songs", "phones", "cities", "teams", "pizzas", "books", "friends",
    "parties", "concerts", "dogs", "cats", "houses", "trains", "flights", "storms", "tickets",
    "shows", "classes", "exams", "students", "meetings", "projects", "pictures", "videos",
    "burgers", "tacos", "players", "fans", "streets", "bridges", "parks", "hotels", "buses",
    "bikes", "shoes", "shirts", "gifts", "headaches", "doctors", "dreams", "ideas", "stories",
    "jokes", "apps", "updates", "batteries", "albums", "bands", "guitars", "museums", "watches",
    "boxes", "people", "children", "memes", "selfies", "prices",
];

const ADJECTIVES: &[&str] = &[
    "amazing", "awesome", "terrible", "great", "bad", "crazy", "beautiful", "boring", "funny",
    "weird", "perfect", "huge", "tiny", "expensive", "cheap", "loud", "quiet", "hot", "cold",
    "late", "early", "new", "old", "sad", "happy", "angry", "tired", "excited", "annoying",
    "interesting", "delicious", "slow", "fast", "busy", "lazy", "epic", "fresh", "cozy", "wild",
    "rainy", "sunny", "windy", "bright", "dark", "strange", "lovely", "nice", "ugly",
    "crowded", "relaxed", "surprised", "stressed", "delayed",
];

const VERBS_ING: &[&str] = &[
    "watching", "playing", "eating", "drinking", "running", "driving", "reading", "listening",
    "waiting", "working", "studying", "cooking", "shopping", "dancing", "singing", "walking",
    "talking", "making", "getting", "coming", "going", "trying", "loving", "hating", "missing",
    "planning", "sharing", "hoping", "baking", "moving", "streaming", "fixing", "cleaning",
    "painting", "swimming", "biking", "texting", "posting", "tweeting", "laughing",
];

const VERBS_PAST: &[&str] = &[
    "watched", "played", "loved", "hated", "missed", "tried", "stopped", "liked", "cancelled",
    "delayed", "finished", "started", "ordered", "bought", "made", "took", "saw", "found",
    "lost", "fixed", "cleaned", "painted", "booked", "visited", "posted", "shared", "closed",
    "opened", "changed", "moved", "baked", "cooked", "danced", "walked", "talked", "called",
    "used", "invited", "arrived", "ate",
];

const VERBS: &[&str] = &[
    "watch", "play", "eat", "drink", "drive", "read", "buy", "sell", "fix", "clean", "cook",
    "love", "hate", "miss", "try", "visit", "call", "share", "post", "order", "book", "skip",
    "follow", "ignore", "celebrate", "enjoy", "forget", "remember", "finish", "start", "stream",
    "paint", "open", "close", "change", "explain", "recommend", "review", "borrow", "trust",
];

const PLACES: &[&str] = &[
    "Paris", "Lyon", "Bucharest", "London", "Berlin", "Madrid", "Rome", "Chicago", "Boston",
    "Seattle", "Austin", "Denver", "Miami", "Houston", "Atlanta", "Phoenix", "Portland",
    "Toronto", "Montreal", "Dublin", "Lisbon", "Vienna", "Prague", "Tokyo", "Seoul", "Sydney",
    "Delhi", "Cairo", "Lagos", "Lima",
];

const TAGS: &[&str] = &[
    "#news", "#music", "#sports", "#food", "#travel", "#love", "#fun", "#tbt", "#mood",
    "#weekend", "#coffee", "#nfl", "#football", "#movies", "#tech", "#gaming", "#art",
    "#fashion", "#health", "#fitness", "#election", "#debate", "#weather", "#traffic",
    "#concert", "#party", "#mondaymotivation", "#foodie", "#instagood", "#nowplaying",
];

const USERS: &[&str] = &[
    "@bob", "@alice", "@news24", "@cityhall", "@coach_k", "@djmike", "@foodblog", "@weatherguy",
    "@techdaily", "@musicfan", "@the_team", "@jessie", "@marco", "@ana_m", "@travelbug",
    "@gamer99", "@bookworm", "@lyon2", "@nightowl", "@sunny_d",
];

const DOMAINS: &[&str] = &[
    "t.co", "bit.ly", "youtu.be", "instagram.com", "example.com", "news.example.org", "goo.gl",
    "fb.me", "ow.ly", "tmblr.co",
];

/// Produces exactly `sf.tweet_count()` records as a deterministic stream.
pub fn generate(sf: ScaleFactor, seed: u64) -> Result<CorpusGenerator> {
    let count = sf.tweet_count();
    if count == 0 {
        return Err(Error::invalid("scale factor yields zero tweets"));
    }
    if count > u32::MAX as u64 {
        return Err(Error::invalid(format!("{count} tweets exceeds the generator limit")));
    }
    Ok(CorpusGenerator::new(count, seed))
}

pub struct CorpusGenerator {
    count: u64,
    next: u64,
    seed: u64,
    text_rng: SplitMix64,
    x_strata: Vec<u32>,
    y_strata: Vec<u32>,
    authors_per_gender: u64,
    date_start: i64,
    date_seconds: u64,
}

impl CorpusGenerator {
    fn new(count: u64, seed: u64) -> Self {
        let mut root = SplitMix64::new(seed);
        let text_rng = root.split();
        let x_strata = permutation(count, &mut root.split());
        let y_strata = permutation(count, &mut root.split());
        let per_gender = count.div_ceil(2);
        CorpusGenerator {
            count,
            next: 0,
            seed,
            text_rng,
            x_strata,
            y_strata,
            authors_per_gender: per_gender.div_ceil(TWEETS_PER_AUTHOR).max(1),
            date_start: date_min().timestamp(),
            date_seconds: (date_max().timestamp() - date_min().timestamp() + 1) as u64,
        }
    }

    fn author(&self, gender: Gender, slot: u64) -> Author {
        let index = 2 * slot + gender as u64;
        let mut rng = SplitMix64::new(mix(self.seed ^ mix(index.wrapping_add(1))));
        let names = match gender {
            Gender::Male => MALE_NAMES,
            Gender::Female => FEMALE_NAMES,
        };
        Author {
            author_id: AUTHOR_ID_BASE + index,
            first_name: rng.pick(names).to_string(),
            last_name: rng.pick(LAST_NAMES).to_string(),
            age: rng.between(AGE_RANGE.0 as i64, AGE_RANGE.1 as i64) as u32,
            gender,
        }
    }

    fn stratified(&mut self, stratum: u64, lo: f64, hi: f64) -> f64 {
        let u = self.text_rng.next_f64();
        let v = lo + (hi - lo) * ((stratum as f64 + u) / self.count as f64);
        ((v * 10_000.0).round() / 10_000.0).clamp(lo, hi)
    }

    fn raw_text(&mut self) -> String {
        let rng = &mut self.text_rng;
        let template = *rng.pick(templates());
        let mut out = String::with_capacity(template.len() + 32);
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let close = open + rest[open..].find('}').expect("templates have balanced slots");
            let slot = &rest[open + 1..close];
            match slot {
                "name" => {
                    let pool = if rng.below(2) == 0 { MALE_NAMES } else { FEMALE_NAMES };
                    out.push_str(rng.pick(pool));
                }
                "noun" | "noun2" => out.push_str(skewed(rng, NOUNS)),
                "nouns" => out.push_str(skewed(rng, PLURAL_NOUNS)),
                "adj" => out.push_str(skewed(rng, ADJECTIVES)),
                "ing" => out.push_str(skewed(rng, VERBS_ING)),
                "past" => out.push_str(skewed(rng, VERBS_PAST)),
                "verb" => out.push_str(skewed(rng, VERBS)),
                "place" => out.push_str(skewed(rng, PLACES)),
                "tag" => out.push_str(skewed(rng, TAGS)),
                "user" => out.push_str(rng.pick(USERS)),
                "num" => out.push_str(&(rng.below(99) + 1).to_string()),
                "url" => {
                    out.push_str("https://");
                    out.push_str(rng.pick(DOMAINS));
                    out.push('/');
                    for _ in 0..7 {
                        let c = b"abcdefghijklmnopqrstuvwxyz0123456789"[rng.below(36) as usize];
                        out.push(c as char);
                    }
                }
                other => unreachable!("unknown template slot {{{other}}}"),
            }
            rest = &rest[close + 1..];
        }
        out.push_str(rest);
        out
    }
}

/// Squared-uniform index: earlier pool entries are drawn more often.
fn skewed<'a>(rng: &mut SplitMix64, pool: &'a [&'a str]) -> &'a str {
    let u = rng.next_f64();
    pool[((u * u) * pool.len() as f64) as usize]
}

fn permutation(count: u64, rng: &mut SplitMix64) -> Vec<u32> {
    let mut p: Vec<u32> = (0..count as u32).collect();
    for i in (1..p.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        p.swap(i, j);
    }
    p
}

impl Iterator for CorpusGenerator {
    type Item = TweetRecord;

    fn next(&mut self) -> Option<TweetRecord> {
        if self.next >= self.count {
            return None;
        }
        let i = self.next;
        self.next += 1;

        let gender = if i % 2 == 0 { Gender::Male } else { Gender::Female };
        let slot = self.text_rng.below(self.authors_per_gender);
        let author = self.author(gender, slot);

        let offset = (((i as f64 + self.text_rng.next_f64()) / self.count as f64)
            * self.date_seconds as f64) as i64;
        let offset = offset.min(self.date_seconds as i64 - 1);
        let date = DateTime::from_timestamp(self.date_start + offset, 0).expect("in range");

        let x = self.stratified(self.x_strata[i as usize] as u64, GEO_X_RANGE.0, GEO_X_RANGE.1);
        let y = self.stratified(self.y_strata[i as usize] as u64, GEO_Y_RANGE.0, GEO_Y_RANGE.1);

        let raw_text = self.raw_text();
        let out = preprocess::preprocess(&raw_text, preprocess::DEFAULT_TF_K)
            .expect("default K is valid");
        let id = TWEET_ID_BASE + i * 1_000 + self.text_rng.below(1_000);

        Some(TweetRecord {
            id,
            raw_text,
            clean_text: out.clean_text,
            lemma_text: out.lemma_text,
            author,
            geo: GeoPoint { x, y },
            date,
            lemma_text_length: out.lemma_text_length,
            words: out.vocabulary,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.count - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for CorpusGenerator {}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sf: f64, seed: u64) -> Vec<TweetRecord> {
        generate(ScaleFactor::new(sf).unwrap(), seed).unwrap().collect()
    }

    #[test]
    fn template_bank_is_large_and_varied() {
        let bank = templates();
        assert!(bank.len() >= 200, "{}", bank.len());
        assert!(bank.iter().filter(|t| t.contains("{tag}")).count() > 50);
        assert!(bank.iter().filter(|t| t.contains("{url}")).count() >= 30);
        assert!(bank.iter().filter(|t| t.contains('\'')).count() > 50);
    }

    #[test]
    fn thousand_tweets_balanced() {
        let records = small(0.001, 42);
        assert_eq!(records.len(), 1_000);
        let male = records.iter().filter(|r| r.gender() == Gender::Male).count();
        assert_eq!(male, 500);
    }

    #[test]
    fn odd_count_differs_by_one() {
        let records: Vec<_> = CorpusGenerator::new(7, 1).collect();
        let male = records.iter().filter(|r| r.gender() == Gender::Male).count();
        assert_eq!((male, records.len() - male), (4, 3));
    }

    #[test]
    fn records_satisfy_invariants_and_domains() {
        let records = small(0.001, 9);
        let corpus = super::super::Corpus::new(records).expect("valid corpus");
        for r in &corpus {
            assert!(r.date >= date_min() && r.date <= date_max());
            assert!((GEO_X_RANGE.0..=GEO_X_RANGE.1).contains(&r.geo.x));
            assert!((GEO_Y_RANGE.0..=GEO_Y_RANGE.1).contains(&r.geo.y));
            assert!((AGE_RANGE.0..=AGE_RANGE.1).contains(&r.author.age));
            assert!(r.lemma_text_length > 0, "{}", r.raw_text);
        }
    }

    #[test]
    fn seeds_change_output() {
        assert_ne!(small(0.001, 1), small(0.001, 2));
        assert_eq!(small(0.001, 5), small(0.001, 5));
    }
}
