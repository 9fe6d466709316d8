from .manifest import RunManifest
from .pipelines import CsvSeriesStorage, InMemoryStorage, InvariantCheck, VtkSnapshotStorage, write_state_vtk
