#![allow(dead_code)]

use collinear4::{MassQuadruple, OrderingClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TABLE_MASSES: [f64; 4] = [20.0, 13.0, 7.0, 6.0];

/// One published cell: angles plus `(mass, r)` pairs in decreasing `r`.
pub struct TableCell {
    pub theta: f64,
    pub phi: f64,
    pub r_by_mass: [(u32, f64); 4],
}

pub const TABLE: [TableCell; 12] = [
    TableCell {
        theta: 1.37525057217299,
        phi: 0.519159557815111,
        r_by_mass: [
            (20, 0.366090733643358),
            (13, -0.065366601796564),
            (7, -0.373701028513627),
            (6, -0.642690274986074),
        ],
    },
    TableCell {
        theta: 0.983901787931397,
        phi: 5.11010135422999,
        r_by_mass: [
            (13, 0.486716343030589),
            (7, 0.165320318621323),
            (20, -0.193830787117565),
            (6, -0.601323157899269),
        ],
    },
    TableCell {
        theta: 1.09192401664393,
        phi: 0.995617232736947,
        r_by_mass: [
            (20, 0.371249801050636),
            (7, 0.012198842811027),
            (13, -0.288938654946377),
            (6, -0.625697567731166),
        ],
    },
    TableCell {
        theta: 0.520721995195208,
        phi: 4.55604682457794,
        r_by_mass: [
            (7, 0.599543803628696),
            (13, 0.246199851994839),
            (20, -0.189462920315934),
            (6, -0.601357715835848),
        ],
    },
    TableCell {
        theta: 1.4087509568619,
        phi: 1.43140526075336,
        r_by_mass: [
            (20, 0.372886439009567),
            (7, 0.022933465266316),
            (6, -0.200419706448564),
            (13, -0.493518830643398),
        ],
    },
    TableCell {
        theta: 1.09821386579505,
        phi: 4.06952228046042,
        r_by_mass: [
            (7, 0.602862162854886),
            (13, 0.259974993861172),
            (6, -0.027293561159533),
            (20, -0.371797434661112),
        ],
    },
    TableCell {
        theta: 0.990022337434498,
        phi: 2.0613259406332,
        r_by_mass: [
            (7, 0.580796256403095),
            (20, 0.166846782575173),
            (6, -0.178777559500521),
            (13, -0.486911083794),
        ],
    },
    TableCell {
        theta: 1.38056997484206,
        phi: 3.65888040700007,
        r_by_mass: [
            (7, 0.619712718177074),
            (6, 0.35795101360832),
            (13, 0.064367025252091),
            (20, -0.366123321858331),
        ],
    },
    TableCell {
        theta: 1.37507165958022,
        phi: 2.58910007135665,
        r_by_mass: [
            (7, 0.612335764627277),
            (6, 0.343103558437492),
            (20, -0.012492053731027),
            (13, -0.468856202184258),
        ],
    },
    TableCell {
        theta: 1.40879758950856,
        phi: 4.56889891614721,
        r_by_mass: [
            (13, 0.492293966825734),
            (7, 0.185550956125581),
            (6, -0.037738503416426),
            (20, -0.373612362055753),
        ],
    },
    TableCell {
        theta: 1.37010123641299,
        phi: 5.72909026677192,
        r_by_mass: [
            (13, 0.4689161624149),
            (20, 0.011823000179912),
            (7, -0.359730715863304),
            (6, -0.635709183991471),
        ],
    },
    TableCell {
        theta: 0.517906500961236,
        phi: 1.65998590626889,
        r_by_mass: [
            (7, 0.58093101386497),
            (20, 0.162048815317523),
            (13, -0.275081849752453),
            (6, -0.621904892770559),
        ],
    },
];

impl TableCell {
    /// `r` indexed by body (mass 20 is body 1, ..., mass 6 is body 4).
    pub fn r(&self) -> [f64; 4] {
        let mut r = [0.0; 4];
        for (mass, value) in self.r_by_mass {
            r[body_of(mass)] = value;
        }
        r
    }

    pub fn ordering(&self) -> OrderingClass {
        OrderingClass::new(self.r_by_mass.map(|(mass, _)| body_of(mass))).unwrap()
    }
}

fn body_of(mass: u32) -> usize {
    TABLE_MASSES.iter().position(|&m| m == mass as f64).unwrap()
}

pub fn random_masses(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> MassQuadruple {
    MassQuadruple::new(std::array::from_fn(|_| rng.random_range(lo..hi))).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
