//! Grid world, base stations, allocation fields, and scenario presets.
//!
//! The environment is immutable after construction and safe to share
//! read-only across concurrent simulation rounds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allocation units: the dimensionless composite-performance proxy a UE
/// receives from its serving station.
pub type Allocation = i64;

/// Default edge length of the square grid, in cells.
pub const DEFAULT_GRID_SIZE: i32 = 23;

/// A cell of the grid world. One unit represents one city block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPosition {
    pub x: i32,
    pub y: i32,
}

impl GridPosition {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for GridPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

/// Rectangular grid extent. Valid positions satisfy `0 <= x < width` and
/// `0 <= y < height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridBounds {
    pub width: i32,
    pub height: i32,
}

impl GridBounds {
    pub fn new(width: i32, height: i32) -> Result<Self> {
        if width < 1 || height < 1 {
            return Err(Error::InvalidBounds { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn contains(&self, pos: GridPosition) -> bool {
        pos.x >= 0 && pos.x < self.width && pos.y >= 0 && pos.y < self.height
    }

    pub fn cell_count(&self) -> usize {
        (self.width as usize) * (self.height as usize)
    }

    /// Row-major cell index: row 0 is y = 0.
    pub fn index_of(&self, pos: GridPosition) -> usize {
        debug_assert!(self.contains(pos));
        (pos.y as usize) * (self.width as usize) + (pos.x as usize)
    }

    pub fn position_at(&self, index: usize) -> GridPosition {
        debug_assert!(index < self.cell_count());
        let w = self.width as usize;
        GridPosition::new((index % w) as i32, (index / w) as i32)
    }

    /// All positions in row-major order (y = 0 row first).
    pub fn positions(&self) -> impl Iterator<Item = GridPosition> + '_ {
        let bounds = *self;
        (0..bounds.cell_count()).map(move |i| bounds.position_at(i))
    }
}

/// Dense per-cell storage addressed by grid position.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    bounds: GridBounds,
    cells: Vec<T>,
}

impl<T: Clone + Default> Grid<T> {
    pub fn new(bounds: GridBounds) -> Self {
        Self {
            bounds,
            cells: vec![T::default(); bounds.cell_count()],
        }
    }
}

impl<T> Grid<T> {
    pub fn bounds(&self) -> GridBounds {
        self.bounds
    }

    pub fn get(&self, pos: GridPosition) -> &T {
        &self.cells[self.bounds.index_of(pos)]
    }

    pub fn get_mut(&mut self, pos: GridPosition) -> &mut T {
        let i = self.bounds.index_of(pos);
        &mut self.cells[i]
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn iter(&self) -> impl Iterator<Item = (GridPosition, &T)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, v)| (self.bounds.position_at(i), v))
    }
}

impl<T> std::ops::Index<GridPosition> for Grid<T> {
    type Output = T;

    fn index(&self, pos: GridPosition) -> &T {
        self.get(pos)
    }
}

impl<T> std::ops::IndexMut<GridPosition> for Grid<T> {
    fn index_mut(&mut self, pos: GridPosition) -> &mut T {
        self.get_mut(pos)
    }
}

/// Stable identifier of a base station.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct StationId(pub u32);

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Axis-aligned quadrant of the plane, anchored at a station's position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrant {
    NE,
    NW,
    SE,
    SW,
}

/// A loaded sector: one quadrant of a station's coverage whose delivered
/// allocation is degraded while its signal ranking is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorLoad {
    pub quadrant: Quadrant,
    pub loaded_allocation: Allocation,
}

#[derive(Debug, Clone)]
pub struct BaseStation {
    pub id: StationId,
    pub position: GridPosition,
    pub base_allocation: Allocation,
    pub loaded_sector: Option<SectorLoad>,
}

/// True when `pos` lies in the station's loaded-sector quadrant.
///
/// The four quadrants partition the plane around the station: each quadrant
/// owns exactly one of its boundary half-lines (NE owns the north ray, SE the
/// east ray, SW the south ray, NW the west ray) and the station's own cell
/// belongs to none of them.
pub fn in_sector(bs: &BaseStation, pos: GridPosition) -> bool {
    let Some(sector) = bs.loaded_sector else {
        return false;
    };
    let dx = pos.x - bs.position.x;
    let dy = pos.y - bs.position.y;
    match sector.quadrant {
        Quadrant::NE => dx >= 0 && dy > 0,
        Quadrant::SE => dx > 0 && dy <= 0,
        Quadrant::SW => dx <= 0 && dy < 0,
        Quadrant::NW => dx < 0 && dy >= 0,
    }
}

/// The immutable grid world: bounds plus at least three base stations.
#[derive(Debug, Clone)]
pub struct Environment {
    bounds: GridBounds,
    stations: Vec<BaseStation>,
}

impl Environment {
    pub fn new(bounds: GridBounds, stations: Vec<BaseStation>) -> Result<Self> {
        if stations.len() < 3 {
            return Err(Error::TooFewStations(stations.len()));
        }
        let mut ids: Vec<StationId> = stations.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateStationId(dup[0]));
        }
        for s in &stations {
            if !bounds.contains(s.position) {
                return Err(Error::StationOutsideGrid {
                    id: s.id,
                    position: s.position,
                    width: bounds.width,
                    height: bounds.height,
                });
            }
            if s.base_allocation <= 0
                || s.loaded_sector.is_some_and(|l| l.loaded_allocation <= 0)
            {
                return Err(Error::NonPositiveAllocation { id: s.id });
            }
        }
        Ok(Self { bounds, stations })
    }

    pub fn from_config(config: &EnvironmentConfig) -> Result<Self> {
        let bounds = GridBounds::new(config.grid.width, config.grid.height)?;
        let stations = config
            .stations
            .iter()
            .map(|s| BaseStation {
                id: StationId(s.id),
                position: GridPosition::new(s.x, s.y),
                base_allocation: s.allocation,
                loaded_sector: s.sector.as_ref().map(|sec| SectorLoad {
                    quadrant: sec.quadrant,
                    loaded_allocation: sec.allocation,
                }),
            })
            .collect();
        Self::new(bounds, stations)
    }

    pub fn bounds(&self) -> GridBounds {
        self.bounds
    }

    pub fn stations(&self) -> &[BaseStation] {
        &self.stations
    }

    pub fn station(&self, id: StationId) -> Result<&BaseStation> {
        self.stations
            .iter()
            .find(|s| s.id == id)
            .ok_or(Error::UnknownStation(id))
    }

    /// Allocation received from station `id` at `pos`: the loaded value when
    /// the position falls in the station's loaded sector, the base value
    /// otherwise. Independent of distance.
    pub fn allocation_at(&self, id: StationId, pos: GridPosition) -> Result<Allocation> {
        if !self.bounds.contains(pos) {
            return Err(Error::OutOfGrid(pos));
        }
        let bs = self.station(id)?;
        Ok(if in_sector(bs, pos) {
            bs.loaded_sector.expect("in_sector implies a sector").loaded_allocation
        } else {
            bs.base_allocation
        })
    }

    /// Distinct allocation values any association can yield, ascending.
    pub fn allocation_values(&self) -> Vec<Allocation> {
        let mut values: Vec<Allocation> = self
            .stations
            .iter()
            .flat_map(|s| {
                std::iter::once(s.base_allocation)
                    .chain(s.loaded_sector.map(|l| l.loaded_allocation))
            })
            .collect();
        values.sort_unstable();
        values.dedup();
        values
    }
}

/// Named scenario presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Four corner stations with allocation 5 plus a center station with
    /// allocation 7; no loaded sectors.
    Default,
    /// Same layout, with the center station's NE sector degraded to
    /// allocation 1.
    SectorLoad,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Scenario::Default),
            "sector_load" => Ok(Scenario::SectorLoad),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Default => write!(f, "default"),
            Scenario::SectorLoad => write!(f, "sector_load"),
        }
    }
}

/// Serializable environment description; the on-disk config file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub grid: GridConfig,
    pub stations: Vec<StationConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub width: i32,
    pub height: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationConfig {
    pub id: u32,
    pub x: i32,
    pub y: i32,
    pub allocation: Allocation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    pub quadrant: Quadrant,
    pub allocation: Allocation,
}

impl EnvironmentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }
}

/// The fully resolved config behind a named preset.
pub fn preset_config(scenario: Scenario) -> EnvironmentConfig {
    let edge = DEFAULT_GRID_SIZE - 1;
    let mut stations = vec![
        StationConfig { id: 0, x: 0, y: 0, allocation: 5, sector: None },
        StationConfig { id: 1, x: edge, y: 0, allocation: 5, sector: None },
        StationConfig { id: 2, x: edge, y: edge, allocation: 5, sector: None },
        StationConfig { id: 3, x: 0, y: edge, allocation: 5, sector: None },
        StationConfig { id: 4, x: edge / 2, y: edge / 2, allocation: 7, sector: None },
    ];
    if scenario == Scenario::SectorLoad {
        stations[4].sector = Some(SectorConfig {
            quadrant: Quadrant::NE,
            allocation: 1,
        });
    }
    EnvironmentConfig {
        grid: GridConfig {
            width: DEFAULT_GRID_SIZE,
            height: DEFAULT_GRID_SIZE,
        },
        stations,
    }
}

/// Build one of the named scenarios.
pub fn build_scenario(scenario: Scenario) -> Environment {
    Environment::from_config(&preset_config(scenario)).expect("presets are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CENTER: StationId = StationId(4);

    #[test]
    fn default_scenario_has_corner_fives_and_center_seven() {
        let env = build_scenario(Scenario::Default);
        assert_eq!(env.stations().len(), 5);
        for s in env.stations() {
            assert!(s.loaded_sector.is_none());
            if s.id == CENTER {
                assert_eq!(s.position, GridPosition::new(11, 11));
                assert_eq!(s.base_allocation, 7);
            } else {
                assert_eq!(s.base_allocation, 5);
            }
        }
    }

    #[test]
    fn sector_load_degrades_only_the_center_ne_quadrant() {
        let env = build_scenario(Scenario::SectorLoad);
        let center = env.station(CENTER).unwrap();
        let sector = center.loaded_sector.unwrap();
        assert_eq!(sector.quadrant, Quadrant::NE);
        assert_eq!(sector.loaded_allocation, 1);
        for s in env.stations() {
            if s.id != CENTER {
                assert!(s.loaded_sector.is_none());
            }
        }
    }

    #[test]
    fn allocation_is_station_intrinsic_in_default_scenario() {
        let env = build_scenario(Scenario::Default);
        for pos in env.bounds().positions() {
            assert_eq!(env.allocation_at(CENTER, pos).unwrap(), 7);
            assert_eq!(env.allocation_at(StationId(0), pos).unwrap(), 5);
        }
    }

    #[test]
    fn loaded_sector_gates_allocation_by_position() {
        let env = build_scenario(Scenario::SectorLoad);
        // Deep inside the NE quadrant.
        assert_eq!(env.allocation_at(CENTER, GridPosition::new(18, 18)).unwrap(), 1);
        // The sector belongs to the center station only.
        assert_eq!(env.allocation_at(StationId(0), GridPosition::new(18, 18)).unwrap(), 5);
        // Outside the quadrant the center still delivers its base value.
        assert_eq!(env.allocation_at(CENTER, GridPosition::new(5, 5)).unwrap(), 7);
    }

    #[test]
    fn sector_membership_follows_the_half_open_quadrant_rule() {
        let env = build_scenario(Scenario::SectorLoad);
        let center = env.station(CENTER).unwrap();
        assert!(in_sector(center, GridPosition::new(12, 12)));
        // North boundary ray belongs to NE; the east ray and the
        // station's own cell do not.
        assert!(in_sector(center, GridPosition::new(11, 15)));
        assert!(!in_sector(center, GridPosition::new(15, 11)));
        assert!(!in_sector(center, GridPosition::new(11, 11)));
        assert!(!in_sector(center, GridPosition::new(5, 5)));
    }

    #[test]
    fn ne_sector_covers_a_12_by_11_block_of_the_default_grid() {
        let env = build_scenario(Scenario::SectorLoad);
        let center = env.station(CENTER).unwrap();
        let count = env
            .bounds()
            .positions()
            .filter(|&p| in_sector(center, p))
            .count();
        assert_eq!(count, 12 * 11);
    }

    #[test]
    fn scenarios_differ_exactly_on_the_loaded_sector() {
        let default_env = build_scenario(Scenario::Default);
        let sector_env = build_scenario(Scenario::SectorLoad);
        let center = sector_env.station(CENTER).unwrap();
        for pos in default_env.bounds().positions() {
            for s in default_env.stations() {
                let a = default_env.allocation_at(s.id, pos).unwrap();
                let b = sector_env.allocation_at(s.id, pos).unwrap();
                if s.id == CENTER && in_sector(center, pos) {
                    assert_ne!(a, b);
                } else {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn allocation_at_returns_base_or_loaded_only() {
        let env = build_scenario(Scenario::SectorLoad);
        for pos in env.bounds().positions() {
            for s in env.stations() {
                let a = env.allocation_at(s.id, pos).unwrap();
                let expected_set: Vec<Allocation> = std::iter::once(s.base_allocation)
                    .chain(s.loaded_sector.map(|l| l.loaded_allocation))
                    .collect();
                assert!(expected_set.contains(&a));
            }
        }
    }

    #[test]
    fn uniform_override_yields_a_flat_field() {
        let mut config = preset_config(Scenario::Default);
        for s in &mut config.stations {
            s.allocation = 5;
        }
        let env = Environment::from_config(&config).unwrap();
        for pos in env.bounds().positions() {
            for s in env.stations() {
                assert_eq!(env.allocation_at(s.id, pos).unwrap(), 5);
            }
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            "warehouse".parse::<Scenario>(),
            Err(Error::UnknownScenario(_))
        ));

        let bounds = GridBounds::new(23, 23).unwrap();
        let station = |id: u32, x: i32, y: i32| BaseStation {
            id: StationId(id),
            position: GridPosition::new(x, y),
            base_allocation: 5,
            loaded_sector: None,
        };

        assert!(matches!(
            Environment::new(bounds, vec![station(0, 0, 0), station(1, 1, 1)]),
            Err(Error::TooFewStations(2))
        ));
        assert!(matches!(
            Environment::new(
                bounds,
                vec![station(0, 0, 0), station(0, 1, 1), station(2, 2, 2)]
            ),
            Err(Error::DuplicateStationId(StationId(0)))
        ));
        assert!(matches!(
            Environment::new(
                bounds,
                vec![station(0, 0, 0), station(1, 1, 1), station(2, 23, 0)]
            ),
            Err(Error::StationOutsideGrid { .. })
        ));

        let mut bad = station(2, 2, 2);
        bad.base_allocation = 0;
        assert!(matches!(
            Environment::new(bounds, vec![station(0, 0, 0), station(1, 1, 1), bad]),
            Err(Error::NonPositiveAllocation { id: StationId(2) })
        ));
    }

    #[test]
    fn lookup_errors() {
        let env = build_scenario(Scenario::Default);
        assert!(matches!(
            env.allocation_at(StationId(9), GridPosition::new(0, 0)),
            Err(Error::UnknownStation(StationId(9)))
        ));
        assert!(matches!(
            env.allocation_at(StationId(0), GridPosition::new(23, 0)),
            Err(Error::OutOfGrid(_))
        ));
        assert!(matches!(
            env.allocation_at(StationId(0), GridPosition::new(0, -1)),
            Err(Error::OutOfGrid(_))
        ));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let config = preset_config(Scenario::SectorLoad);
        let text = config.to_toml_string().unwrap();
        let parsed = EnvironmentConfig::from_toml_str(&text).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let text = "
            [grid]
            width = 23
            height = 23
            rows = 9

            [[stations]]
            id = 0
            x = 0
            y = 0
            allocation = 5
        ";
        assert!(EnvironmentConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn grid_indexing_is_row_major_from_y_zero() {
        let bounds = GridBounds::new(3, 2).unwrap();
        assert_eq!(bounds.index_of(GridPosition::new(0, 0)), 0);
        assert_eq!(bounds.index_of(GridPosition::new(2, 0)), 2);
        assert_eq!(bounds.index_of(GridPosition::new(0, 1)), 3);
        assert_eq!(bounds.position_at(5), GridPosition::new(2, 1));
        assert_eq!(bounds.positions().count(), 6);

        let mut grid: Grid<i64> = Grid::new(bounds);
        grid[GridPosition::new(1, 1)] = 9;
        assert_eq!(grid.cells()[4], 9);
    }

    #[test]
    fn allocation_values_are_deduplicated_and_sorted() {
        assert_eq!(build_scenario(Scenario::Default).allocation_values(), vec![5, 7]);
        assert_eq!(
            build_scenario(Scenario::SectorLoad).allocation_values(),
            vec![1, 5, 7]
        );
    }
}
