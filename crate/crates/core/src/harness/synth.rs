//! Synthetic scenes standing in for object-detector output.
//!
//! Each scene is a set of boxes on a 100x100 canvas. Ground-truth relations
//! follow from geometry: `is_on(a,b)` when a's center lies inside the larger
//! box b, `is_close(a,b)` when two boxes are not on each other and their
//! edges are less than [`CLOSE_GAP`] apart. Positive scenes contain one or
//! two instances of the target pattern; negatives contain distractors and
//! often a broken copy of the pattern (a wrong class, a swapped or missing
//! relation, or an object missing from the image's object list).
//!
//! Detector noise then turns ground truth into probabilistic facts: objects
//! are missed, kept objects get a class confidence drawn around a mean,
//! some objects get a second, wrong class label and phantom objects appear,
//! both with low confidence. Labels may finally be flipped.

use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::bundle::TaskBundle;
use crate::infer::ExampleIndex;
use crate::kb::{ExampleRecord, Label, ProbFact};
use crate::logic::{Atom, Bias, Clause, HypothesisProgram, PredSig, Term};
use crate::parser::parse_program;

pub const HAS_OBJECT: &str = "has_object";
pub const IS_ON: &str = "is_on";
pub const IS_CLOSE: &str = "is_close";
pub const CANVAS: f64 = 100.0;
/// Largest edge gap counted as close.
pub const CLOSE_GAP: f64 = 5.0;
/// Free placements keep at least this gap to every other box.
const FREE_GAP: f64 = 10.0;
const MAX_ATTEMPTS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorNoise {
    /// Class confidence of true detections, drawn from N(mean, spread).
    pub tp_mean: f64,
    pub tp_spread: f64,
    /// Chance per object of an extra wrong class label, and per scene of a
    /// phantom object.
    pub fp_rate: f64,
    /// Mean confidence of wrong labels and phantoms.
    pub fp_mean: f64,
    pub miss_rate: f64,
    pub flip_rate: f64,
}

impl DetectorNoise {
    pub fn none() -> Self {
        DetectorNoise {
            tp_mean: 1.0,
            tp_spread: 0.0,
            fp_rate: 0.0,
            fp_mean: 0.35,
            miss_rate: 0.0,
            flip_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tp_mean", self.tp_mean),
            ("fp_rate", self.fp_rate),
            ("fp_mean", self.fp_mean),
            ("miss_rate", self.miss_rate),
            ("flip_rate", self.flip_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if !(self.tp_spread >= 0.0) {
            return Err(Error::Config(format!("tp_spread = {} is negative", self.tp_spread)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    None,
    Easy,
    Intermediate,
    Hard,
}

impl Tier {
    pub const ALL: [Tier; 4] = [Tier::None, Tier::Easy, Tier::Intermediate, Tier::Hard];

    pub fn noise(self) -> DetectorNoise {
        let base = DetectorNoise::none();
        match self {
            Tier::None => base,
            Tier::Easy => DetectorNoise {
                tp_mean: 0.8,
                tp_spread: 0.15,
                fp_rate: 0.05,
                miss_rate: 0.05,
                ..base
            },
            Tier::Intermediate => DetectorNoise {
                tp_mean: 0.72,
                tp_spread: 0.18,
                fp_rate: 0.15,
                miss_rate: 0.10,
                ..base
            },
            Tier::Hard => DetectorNoise {
                tp_mean: 0.65,
                tp_spread: 0.2,
                fp_rate: 0.25,
                miss_rate: 0.15,
                flip_rate: 0.06,
                ..base
            },
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::None => "none",
            Tier::Easy => "easy",
            Tier::Intermediate => "intermediate",
            Tier::Hard => "hard",
        })
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Tier::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| format!("unknown noise tier {s} (expected none, easy, intermediate or hard)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    pub object_classes: Vec<String>,
    /// Inclusive range of distractor objects per scene.
    pub n_objects: (usize, usize),
    pub target: HypothesisProgram,
    pub noise: DetectorNoise,
    /// Fraction of negative scenes holding a broken copy of the pattern.
    pub near_miss_rate: f64,
    /// Relative weights of the near-miss moves: another class for one
    /// object, is_on and is_close swapped, a relation dropped, an object
    /// left out of has_object.
    pub near_miss_weights: [u32; 4],
    /// Inclusive range of pattern copies in a positive scene, and of broken
    /// copies in a near-miss negative scene.
    pub copies: (usize, usize),
    /// Relation confidence from how clearly the geometry holds, instead of 1.
    pub geometry_confidence: bool,
    pub seed: u64,
}

pub fn vehicle_on_bridge() -> HypothesisProgram {
    parse_program("f(A) :- has_object(A,B), vehicle(B), is_on(B,C), bridge(C).").expect("valid program")
}

impl SceneConfig {
    pub fn new(target: HypothesisProgram, noise: DetectorNoise, seed: u64) -> Self {
        SceneConfig {
            object_classes: ["vehicle", "bridge", "roundabout", "road"].map(String::from).to_vec(),
            n_objects: (2, 5),
            target,
            noise,
            near_miss_rate: 0.75,
            near_miss_weights: [1, 1, 1, 1],
            copies: (2, 3),
            geometry_confidence: false,
            seed,
        }
    }

    pub fn tier(tier: Tier, seed: u64) -> Self {
        Self::new(vehicle_on_bridge(), tier.noise(), seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if !(0.0..=1.0).contains(&self.near_miss_rate) {
            return Err(Error::Config(format!("near-miss rate {} is outside [0, 1]", self.near_miss_rate)));
        }
        if self.near_miss_weights.iter().all(|&w| w == 0) {
            return Err(Error::Config("all near-miss weights are zero".into()));
        }
        if self.object_classes.is_empty() {
            return Err(Error::Config("no object classes".into()));
        }
        if self.copies.0 == 0 || self.copies.0 > self.copies.1 {
            return Err(Error::Config("the pattern copy range must be non-empty and start at 1 or more".into()));
        }
        if self.n_objects.0 > self.n_objects.1 {
            return Err(Error::Config("empty distractor count range".into()));
        }
        if self.target.head_arity() != 1 {
            return Err(Error::Config("the target head must be unary".into()));
        }
        for c in self.target.clauses() {
            Pattern::from_clause(c, &self.object_classes)?;
        }
        Ok(())
    }

    /// Declarations covering every predicate the generator emits.
    pub fn bias(&self) -> Result<Bias> {
        let mut preds = vec![PredSig::new(HAS_OBJECT, 2)];
        preds.extend(self.object_classes.iter().map(|c| PredSig::new(c.clone(), 1)));
        preds.push(PredSig::new(IS_ON, 2));
        preds.push(PredSig::new(IS_CLOSE, 2));
        Bias::new(PredSig::new(self.target.head_pred(), 1), preds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rel {
    On,
    Close,
}

#[derive(Clone, Debug)]
struct PatternObject {
    class: Option<String>,
    /// Required in the image's object list by the pattern.
    linked: bool,
    /// Present in the object list of an instantiated scene.
    listed: bool,
}

/// Objects and relations required by one target clause.
#[derive(Clone, Debug)]
struct Pattern {
    objects: Vec<PatternObject>,
    relations: Vec<(Rel, usize, usize)>,
}

impl Pattern {
    fn from_clause(c: &Clause, classes: &[String]) -> Result<Pattern> {
        let head = match &c.head.args[..] {
            [Term::Var(v)] => v.as_str(),
            _ => return Err(Error::Config("the target head must have one variable".into())),
        };
        let mut vars: Vec<&str> = Vec::new();
        fn index<'a>(v: &'a Term, head: &str, vars: &mut Vec<&'a str>) -> Result<usize> {
            let Term::Var(name) = v else {
                return Err(Error::Config(format!("constant {v} in the target pattern")));
            };
            if name == head {
                return Err(Error::Config("the image variable may only appear in has_object".into()));
            }
            Ok(match vars.iter().position(|x| *x == name.as_str()) {
                Some(i) => i,
                None => {
                    vars.push(name.as_str());
                    vars.len() - 1
                }
            })
        }
        let mut classes_of: Vec<(usize, String)> = Vec::new();
        let mut listed: Vec<usize> = Vec::new();
        let mut relations = Vec::new();
        for a in &c.body {
            match (a.pred.as_str(), &a.args[..]) {
                (HAS_OBJECT, [Term::Var(img), o]) if img == head => listed.push(index(o, head, &mut vars)?),
                (IS_ON, [x, y]) => relations.push((Rel::On, index(x, head, &mut vars)?, index(y, head, &mut vars)?)),
                (IS_CLOSE, [x, y]) => relations.push((Rel::Close, index(x, head, &mut vars)?, index(y, head, &mut vars)?)),
                (p, [o]) if classes.iter().any(|c| c == p) => classes_of.push((index(o, head, &mut vars)?, p.to_string())),
                _ => return Err(Error::Config(format!("the scene generator cannot realize {a}"))),
            }
        }
        let blank = PatternObject {
            class: None,
            linked: false,
            listed: true,
        };
        let mut objects = vec![blank; vars.len()];
        for (i, class) in classes_of {
            if objects[i].class.as_ref().is_some_and(|c| *c != class) {
                return Err(Error::Config(format!("object {} needs two classes", vars[i])));
            }
            objects[i].class = Some(class);
        }
        for i in listed {
            objects[i].linked = true;
        }
        Ok(Pattern { objects, relations })
    }

    /// A copy with one part broken.
    fn near_miss(&self, classes: &[String], weights: [u32; 4], rng: &mut ChaCha8Rng) -> Pattern {
        let mut p = self.clone();
        let mut moves: Vec<u8> = Vec::new();
        if classes.len() > 1 && p.objects.iter().any(|o| o.class.is_some()) {
            moves.push(0);
        }
        if !p.relations.is_empty() {
            moves.extend([1, 2]);
        }
        if p.objects.iter().any(|o| o.linked) {
            moves.push(3);
        }
        let choice = moves
            .choose_weighted(rng, |&m| weights[m as usize])
            .ok()
            .or_else(|| moves.choose(rng));
        match choice {
            Some(0) => {
                let typed: Vec<usize> = (0..p.objects.len()).filter(|&i| p.objects[i].class.is_some()).collect();
                let i = *typed.choose(rng).expect("typed object");
                let current = p.objects[i].class.clone();
                let others: Vec<&String> = classes.iter().filter(|c| Some(*c) != current.as_ref()).collect();
                p.objects[i].class = others.choose(rng).map(|c| (*c).clone());
            }
            Some(1) => {
                let r = rng.random_range(0..p.relations.len());
                let rel = &mut p.relations[r].0;
                *rel = if *rel == Rel::On { Rel::Close } else { Rel::On };
            }
            Some(2) => {
                let r = rng.random_range(0..p.relations.len());
                p.relations.remove(r);
            }
            Some(3) => {
                let linked: Vec<usize> = (0..p.objects.len()).filter(|&i| p.objects[i].linked).collect();
                p.objects[*linked.choose(rng).expect("linked object")].listed = false;
            }
            _ => {}
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct BoxF {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl BoxF {
    fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    fn area(&self) -> f64 {
        self.w * self.h
    }

    fn contains(&self, (px, py): (f64, f64)) -> bool {
        px > self.x && px < self.x + self.w && py > self.y && py < self.y + self.h
    }

    /// Distance from the point to the nearest edge, inside the box.
    fn depth(&self, (px, py): (f64, f64)) -> f64 {
        (px - self.x).min(self.x + self.w - px).min(py - self.y).min(self.y + self.h - py)
    }

    fn gap(&self, o: &BoxF) -> f64 {
        let (ax, ay) = self.center();
        let (bx, by) = o.center();
        let dx = ((ax - bx).abs() - (self.w + o.w) / 2.0).max(0.0);
        let dy = ((ay - by).abs() - (self.h + o.h) / 2.0).max(0.0);
        dx.max(dy)
    }
}

fn class_size(class: &str, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (w, h) = match class {
        "vehicle" => ((3.0, 5.0), (3.0, 5.0)),
        "bridge" => ((20.0, 28.0), (8.0, 12.0)),
        "roundabout" => ((12.0, 16.0), (12.0, 16.0)),
        "road" => ((30.0, 45.0), (5.0, 8.0)),
        _ => ((6.0, 12.0), (6.0, 12.0)),
    };
    (rng.random_range(w.0..=w.1), rng.random_range(h.0..=h.1))
}

#[derive(Clone, Debug)]
struct SceneObject {
    class: String,
    listed: bool,
    bbox: BoxF,
}

struct Scene {
    objects: Vec<SceneObject>,
}

impl Scene {
    fn place_free(&self, (w, h): (f64, f64), rng: &mut ChaCha8Rng) -> BoxF {
        let mut b = BoxF { x: 0.0, y: 0.0, w, h };
        for _ in 0..200 {
            b.x = rng.random_range(0.0..=(CANVAS - w).max(0.0));
            b.y = rng.random_range(0.0..=(CANVAS - h).max(0.0));
            if self.objects.iter().all(|o| o.bbox.gap(&b) >= FREE_GAP) {
                break;
            }
        }
        b
    }

    fn place_on(host: &BoxF, (w, h): (f64, f64), rng: &mut ChaCha8Rng) -> BoxF {
        let (w, h) = (w.min(host.w * 0.6), h.min(host.h * 0.6));
        let cx = rng.random_range(host.x + w / 2.0..=host.x + host.w - w / 2.0);
        let cy = rng.random_range(host.y + h / 2.0..=host.y + host.h - h / 2.0);
        BoxF { x: cx - w / 2.0, y: cy - h / 2.0, w, h }
    }

    fn place_under(guest: &BoxF, (w, h): (f64, f64), rng: &mut ChaCha8Rng) -> BoxF {
        let (w, h) = (w.max(guest.w / 0.6), h.max(guest.h / 0.6));
        let (gx, gy) = guest.center();
        let x = gx - rng.random_range(w * 0.2..=w * 0.8);
        let y = gy - rng.random_range(h * 0.2..=h * 0.8);
        BoxF { x, y, w, h }
    }

    fn place_close(other: &BoxF, (w, h): (f64, f64), rng: &mut ChaCha8Rng) -> BoxF {
        let gap = rng.random_range(1.0..CLOSE_GAP - 1.0);
        let along = rng.random_range(0.2..=0.8);
        match rng.random_range(0..4) {
            0 => BoxF { x: other.x + other.w + gap, y: other.y + other.h * along - h / 2.0, w, h },
            1 => BoxF { x: other.x - gap - w, y: other.y + other.h * along - h / 2.0, w, h },
            2 => BoxF { x: other.x + other.w * along - w / 2.0, y: other.y + other.h + gap, w, h },
            _ => BoxF { x: other.x + other.w * along - w / 2.0, y: other.y - gap - h, w, h },
        }
    }

    fn instantiate(&mut self, p: &Pattern, classes: &[String], rng: &mut ChaCha8Rng) {
        let n = p.objects.len();
        let class: Vec<String> = p
            .objects
            .iter()
            .map(|o| o.class.clone().unwrap_or_else(|| classes.choose(rng).expect("classes").clone()))
            .collect();
        let mut placed: Vec<Option<BoxF>> = vec![None; n];
        while placed.iter().any(Option::is_none) {
            let mut progress = false;
            for &(rel, a, b) in &p.relations {
                let bbox = match (placed[a], placed[b], rel) {
                    (Some(_), Some(_), _) | (None, None, _) => continue,
                    (None, Some(host), Rel::On) => (a, Self::place_on(&host, class_size(&class[a], rng), rng)),
                    (Some(guest), None, Rel::On) => (b, Self::place_under(&guest, class_size(&class[b], rng), rng)),
                    (None, Some(o), Rel::Close) => (a, Self::place_close(&o, class_size(&class[a], rng), rng)),
                    (Some(o), None, Rel::Close) => (b, Self::place_close(&o, class_size(&class[b], rng), rng)),
                };
                placed[bbox.0] = Some(bbox.1);
                progress = true;
            }
            if !progress {
                let i = placed.iter().position(Option::is_none).expect("unplaced object");
                placed[i] = Some(self.place_free(class_size(&class[i], rng), rng));
            }
        }
        for (i, b) in placed.into_iter().enumerate() {
            self.objects.push(SceneObject {
                class: class[i].clone(),
                listed: p.objects[i].listed,
                bbox: b.expect("placed"),
            });
        }
    }
}

/// Ground-truth relation facts between scene objects, with a confidence.
fn relations(objs: &[(String, &SceneObject)], margin: bool) -> Vec<(String, String, String, f64)> {
    let mut out = Vec::new();
    for (ia, a) in objs {
        for (ib, b) in objs {
            if ia == ib {
                continue;
            }
            let on = |x: &SceneObject, y: &SceneObject| y.bbox.contains(x.bbox.center()) && x.bbox.area() < y.bbox.area();
            if on(a, b) {
                let conf = if margin {
                    let depth = b.bbox.depth(a.bbox.center()) / (0.5 * b.bbox.w.min(b.bbox.h));
                    0.5 + 0.5 * depth.min(1.0)
                } else {
                    1.0
                };
                out.push((IS_ON.to_string(), ia.clone(), ib.clone(), conf));
            } else if !on(b, a) && a.bbox.gap(&b.bbox) < CLOSE_GAP {
                let conf = if margin { 1.0 - 0.5 * a.bbox.gap(&b.bbox) / CLOSE_GAP } else { 1.0 };
                out.push((IS_CLOSE.to_string(), ia.clone(), ib.clone(), conf));
            }
        }
    }
    out
}

fn round3(p: f64) -> f64 {
    ((p * 1000.0).round() / 1000.0).clamp(0.001, 1.0)
}

fn atom2(pred: &str, a: &str, b: &str) -> Atom {
    Atom::new(pred, vec![Term::constant(a), Term::constant(b)])
}

fn atom1(pred: &str, a: &str) -> Atom {
    Atom::new(pred, vec![Term::constant(a)])
}

/// Exact facts of a scene, used to check its label.
fn ground_truth(id: &str, objects: &[SceneObject]) -> Vec<ProbFact> {
    let named: Vec<(String, &SceneObject)> = objects.iter().enumerate().map(|(i, o)| (format!("o{}", i + 1), o)).collect();
    let mut facts = Vec::new();
    for (name, o) in &named {
        if o.listed {
            facts.push(ProbFact::certain(atom2(HAS_OBJECT, id, name)));
        }
        facts.push(ProbFact::certain(atom1(&o.class, name)));
    }
    for (p, a, b, _) in relations(&named, false) {
        facts.push(ProbFact::certain(atom2(&p, &a, &b)));
    }
    facts
}

struct Generator<'a> {
    cfg: &'a SceneConfig,
    patterns: Vec<Pattern>,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn scene(&mut self, id: &str, label: Label) -> Result<Vec<SceneObject>> {
        let classes = &self.cfg.object_classes;
        for _ in 0..MAX_ATTEMPTS {
            let mut scene = Scene { objects: Vec::new() };
            let rng = &mut self.rng;
            match label {
                Label::Positive => {
                    let copies = rng.random_range(self.cfg.copies.0..=self.cfg.copies.1);
                    for _ in 0..copies {
                        let p = self.patterns.choose(rng).expect("pattern");
                        scene.instantiate(p, classes, rng);
                    }
                }
                Label::Negative => {
                    if rng.random_bool(self.cfg.near_miss_rate) {
                        let copies = rng.random_range(self.cfg.copies.0..=self.cfg.copies.1);
                        for _ in 0..copies {
                            let p = self.patterns.choose(rng).expect("pattern");
                            let p = p.near_miss(classes, self.cfg.near_miss_weights, rng);
                            scene.instantiate(&p, classes, rng);
                        }
                    }
                }
            }
            let n = rng.random_range(self.cfg.n_objects.0..=self.cfg.n_objects.1);
            for _ in 0..n {
                let class = classes.choose(rng).expect("classes").clone();
                let bbox = scene.place_free(class_size(&class, rng), rng);
                scene.objects.push(SceneObject { class, listed: true, bbox });
            }
            scene.objects.shuffle(rng);
            let truth = ExampleRecord::new(id, label, ground_truth(id, &scene.objects));
            if ExampleIndex::new(&truth).entails(&self.cfg.target) == label.is_positive() {
                return Ok(scene.objects);
            }
        }
        Err(Error::Config(format!(
            "could not build a {} scene for the target after {MAX_ATTEMPTS} attempts",
            if label.is_positive() { "positive" } else { "negative" }
        )))
    }

    /// Detector view of a scene.
    fn detect(&mut self, id: &str, objects: &[SceneObject]) -> Result<Vec<ProbFact>> {
        let noise = self.cfg.noise;
        let classes = &self.cfg.object_classes;
        let rng = &mut self.rng;
        let tp = Normal::new(noise.tp_mean, noise.tp_spread).map_err(|e| Error::Config(e.to_string()))?;
        let fp = Normal::new(noise.fp_mean, noise.tp_spread.max(0.1)).map_err(|e| Error::Config(e.to_string()))?;
        let mut kept: Vec<(SceneObject, Vec<(String, f64)>)> = Vec::new();
        for o in objects {
            if rng.random_bool(noise.miss_rate) {
                continue;
            }
            let conf = if noise.tp_spread == 0.0 { noise.tp_mean } else { tp.sample(rng).clamp(0.05, 1.0) };
            let mut labels = vec![(o.class.clone(), conf)];
            if classes.len() > 1 && rng.random_bool(noise.fp_rate) {
                let wrong: Vec<&String> = classes.iter().filter(|c| **c != o.class).collect();
                let c = (*wrong.choose(rng).expect("another class")).clone();
                labels.push((c, fp.sample(rng).clamp(0.02, 0.95)));
            }
            kept.push((o.clone(), labels));
        }
        if rng.random_bool(noise.fp_rate) {
            let class = classes.choose(rng).expect("classes").clone();
            let scene = Scene { objects: kept.iter().map(|(o, _)| o.clone()).collect() };
            let bbox = scene.place_free(class_size(&class, rng), rng);
            let conf = fp.sample(rng).clamp(0.02, 0.95);
            kept.push((SceneObject { class: class.clone(), listed: true, bbox }, vec![(class, conf)]));
        }
        let named: Vec<(String, &SceneObject)> =
            kept.iter().enumerate().map(|(i, (o, _))| (format!("o{}", i + 1), o)).collect();
        let mut facts = Vec::new();
        for (name, o) in &named {
            if o.listed {
                facts.push(ProbFact::certain(atom2(HAS_OBJECT, id, name)));
            }
        }
        for ((name, _), (_, labels)) in named.iter().zip(&kept) {
            for (class, conf) in labels {
                facts.push(ProbFact::new(round3(*conf), atom1(class, name)));
            }
        }
        for (p, a, b, conf) in relations(&named, self.cfg.geometry_confidence) {
            facts.push(ProbFact::new(round3(conf), atom2(&p, &a, &b)));
        }
        Ok(facts)
    }
}

/// Builds `n_pos` positive then `n_neg` negative scenes, ids `img001`, ….
pub fn synth_generate(cfg: &SceneConfig, n_pos: usize, n_neg: usize) -> Result<TaskBundle> {
    cfg.validate()?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Config("need at least one positive and one negative scene".into()));
    }
    let patterns = cfg
        .target
        .clauses()
        .iter()
        .map(|c| Pattern::from_clause(c, &cfg.object_classes))
        .collect::<Result<Vec<_>>>()?;
    let mut gen = Generator {
        cfg,
        patterns,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let width = (n_pos + n_neg).to_string().len().max(3);
    let mut examples = Vec::with_capacity(n_pos + n_neg);
    let labels = std::iter::repeat_n(Label::Positive, n_pos).chain(std::iter::repeat_n(Label::Negative, n_neg));
    for (i, label) in labels.enumerate() {
        let id = format!("img{:0width$}", i + 1);
        let objects = gen.scene(&id, label)?;
        let facts = gen.detect(&id, &objects)?;
        let label = if gen.rng.random_bool(cfg.noise.flip_rate) { label.flipped() } else { label };
        examples.push(ExampleRecord::new(id, label, facts));
    }
    Ok(TaskBundle {
        bias: cfg.bias()?,
        examples,
    })
}
