//! Seeded generators of schema-valid decompositions, annotation sets, and
//! benchmark ground truth.

use fsukit::batch::GroundTruthRecord;
use fsukit::distill::Annotation;
use fsukit::schema::{
    AttrValue, BinaryGlobal, FsuEntry, FsuGroup, FunctionType, GlobalAttributes, Schema, SignDecomposition,
};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Benchmark size per category, in report column order.
pub const BENCHMARK_SPLIT: [(FunctionType, usize); 4] = [
    (FunctionType::Direction, 34),
    (FunctionType::Notice, 21),
    (FunctionType::Lane, 50),
    (FunctionType::Construction, 14),
];

const PLACES: &[&str] = &[
    "Fulong Rd",
    "Mingle Rd",
    "Yangtaishan Rd",
    "Li Yang Road",
    "The Bund",
    "Haining Road",
    "Airport",
    "City Center",
    "Railway Station",
    "North Ring Expressway",
];
const TIMES: &[&str] = &["7-9", "17-19", "7-21", "0-24", "9-17"];
const DATES: &[&str] = &["Mon-Fri", "Weekends", "Holidays", "Daily"];
const SPEEDS: &[&str] = &["40", "60", "80", "100", "120"];
const WEIGHTS: &[&str] = &["10t", "20t", "55t"];
const HEIGHTS: &[&str] = &["3m", "4m", "4.5m"];
const VEHICLES: &[&str] = &["Bus", "Truck", "Taxi", "Motorcycle", "Bicycle"];
const PLATES: &[&str] = &["Odd", "Even", "Non-local"];
const DISTANCES: &[&str] = &["200m", "500m", "1km", "2km"];
const STATUS: &[&str] = &["Smooth", "Congested", "Slow"];
const LOCATIONS: &[&str] = &["Left", "Middle", "Right"];
const SPECIAL: &[&str] = &["Bus Lane", "Bicycle Lane", "HOV Lane", "Tidal Lane"];
const OTHER: &[&str] = &["No Parking", "Keep Distance", "Slow Down", "Use Low Beam"];
const SITES: &[&str] = &["Ahead 500m", "Right Lane", "Left Lane", "Bridge"];
const DETOURS: &[&str] = &["Use Left Lane", "Follow Signs", "Via Mingle Rd"];
const GLOBAL_OTHER: &[&str] = &["Green Background", "Blue Background", "Yellow Border"];

fn pick<'a>(rng: &mut impl Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).expect("non-empty pool")
}

fn open_value(rng: &mut impl Rng, function: FunctionType, key: &str) -> AttrValue {
    let pool: &[&str] = match key {
        "Via" | "Road Range" => PLACES,
        "Destination" => {
            let n = rng.random_range(1..=3);
            let mut places = PLACES.to_vec();
            places.shuffle(rng);
            return if n == 1 {
                AttrValue::scalar(places[0])
            } else {
                AttrValue::list(&places[..n])
            };
        }
        "Traffic Status" => STATUS,
        "Distance" => DISTANCES,
        "Location" => LOCATIONS,
        "Special Lane" => SPECIAL,
        "Time" => TIMES,
        "Date" => DATES,
        "Speed" => SPEEDS,
        "Weight" => WEIGHTS,
        "Height" => HEIGHTS,
        "Vehicle Type" => VEHICLES,
        "License Plate" => PLATES,
        "Construction Site" => SITES,
        "Detour Information" => DETOURS,
        "Electronic Sign" => &["Yes", "No"],
        "Direction" if function == FunctionType::Notice => &["Left", "Right", "Ahead"],
        _ => OTHER,
    };
    AttrValue::scalar(pick(rng, pool))
}

fn entry(rng: &mut impl Rng, schema: &Schema, function: FunctionType) -> FsuEntry {
    let keys = schema.registry(function);
    let n = rng.random_range(1..=keys.len().min(4));
    let mut chosen: Vec<&String> = keys.iter().collect();
    chosen.shuffle(rng);
    let mut e = FsuEntry::new(function, 0);
    for key in chosen.into_iter().take(n) {
        let value = match schema.enumeration(function, key) {
            Some(allowed) => AttrValue::scalar(allowed.choose(rng).expect("non-empty enumeration")),
            None => open_value(rng, function, key),
        };
        e.attrs.insert(key.clone(), value);
    }
    e
}

/// A schema-valid decomposition whose primary function is `function`.
/// Occasionally a second group of another function is appended.
pub fn decomposition(rng: &mut impl Rng, schema: &Schema, function: FunctionType) -> SignDecomposition {
    let mut globals = GlobalAttributes::new();
    for key in BinaryGlobal::ALL {
        let yes = match key {
            BinaryGlobal::TrafficSign => rng.random_bool(0.95),
            _ => rng.random_bool(0.2),
        };
        globals.set(key, if yes { "Yes" } else { "No" });
    }
    if rng.random_bool(0.3) {
        globals.set_other_global_info(Some(AttrValue::scalar(pick(rng, GLOBAL_OTHER))));
    }
    let mut functions = vec![function];
    if rng.random_bool(0.15) {
        let others: Vec<FunctionType> = FunctionType::ALL.into_iter().filter(|f| *f != function).collect();
        functions.push(*others.choose(rng).expect("three others"));
    }
    let groups = functions
        .into_iter()
        .map(|f| {
            let mut g = FsuGroup::new(f);
            for _ in 0..rng.random_range(1..=4) {
                g.push(entry(rng, schema, f));
            }
            g.with_matching_count()
        })
        .collect();
    SignDecomposition {
        globals,
        groups,
        ..Default::default()
    }
}

/// A decomposition with a uniformly drawn primary function.
pub fn random_decomposition(rng: &mut impl Rng, schema: &Schema) -> SignDecomposition {
    let f = *FunctionType::ALL.choose(rng).expect("four functions");
    decomposition(rng, schema, f)
}

pub fn image_ref(i: usize) -> String {
    format!("img_{i:04}.jpg")
}

/// `n` annotated images `img_0000.jpg`, `img_0001.jpg`, ...
pub fn annotations(n: usize, seed: u64) -> Vec<Annotation> {
    let schema = Schema::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| Annotation {
            image: image_ref(i),
            gt: random_decomposition(&mut rng, schema),
        })
        .collect()
}

/// Benchmark ground truth following [`BENCHMARK_SPLIT`], as
/// `(id, category, decomposition)`.
pub fn benchmark(seed: u64) -> Vec<(String, FunctionType, SignDecomposition)> {
    let schema = Schema::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (f, n) in BENCHMARK_SPLIT {
        for i in 0..n {
            out.push((format!("{}-{i:03}", f.name().to_lowercase()), f, decomposition(&mut rng, schema, f)));
        }
    }
    out
}

/// The benchmark as ground-truth records with canonical dictionary text.
pub fn benchmark_records(seed: u64) -> Vec<GroundTruthRecord> {
    let schema = Schema::builtin();
    benchmark(seed)
        .into_iter()
        .map(|(id, f, d)| GroundTruthRecord {
            id,
            ground_truth: schema.serialize(&d),
            category: Some(f),
        })
        .collect()
}

/// A well-formed response that reproduces `d` exactly.
pub fn identity_response(d: &SignDecomposition) -> String {
    format!(
        "<caption>A traffic sign.</caption><FSU>{}</FSU>",
        Schema::builtin().serialize(d)
    )
}
