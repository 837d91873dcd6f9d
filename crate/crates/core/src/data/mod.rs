//! Weather and household preparation, merge, features, splits, scaling and
//! windowing.

pub mod csvio;
pub mod dst;
pub mod normalize;
pub mod prepared;
pub mod series;
pub mod split;
pub mod table;
pub mod window;

pub use csvio::{read_household, read_household_file, read_weather, read_weather_file, write_household, write_weather};
pub use dst::{dst_annotate, DstRule, DST, NOT_DST};
pub use normalize::{normalize, ColumnScaling, FeatureStat, NormStats, NormalizedSplit};
pub use prepared::{prepare, NormalizedSplits, PrepareConfig, PreparedDataset};
pub use series::{adjust_to_local, average_stations, fill_missing_temperature, HouseholdSeries, LocalWeather, WeatherSeries};
pub use split::{split, split_at, split_with, SplitBounds, Splits};
pub use table::{lockdown_filter, merge, MergeStats, TimeRow, TimeTable, FEATURE_NAMES};
pub use window::{sample_count, window, WindowedDataset, STANDARD_WINDOWS};
