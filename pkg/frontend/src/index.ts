export {
  BadActionError,
  ConfigParseError,
  EnvHandle,
  EpisodeOverError,
  EXPECTED_NATIVE_VERSION,
  HandleClosedError,
  NativeVersionMismatchError,
  ProtocolError,
  envReset,
  envStep,
  makeEnv,
  makeEnvFromPreset,
  type EventCounts,
  type MakeEnvOptions,
  type Observation,
  type StepResult,
} from "./env.js";

export {
  SchemaMismatchError,
  parseCareMatrixCsv,
  parseCurvesCsv,
  parseCsv,
  type CareMatrix,
  type Curves,
  type CurveSeries,
} from "./csv.js";

export { HEATMAP_SUPPRESS_BELOW, plotCareMatrix, plotCurves } from "./plots.js";
