export { demangleSymbols, qualifiedName, removeModifiers } from './demangle';
export { extractLibrarySpec, libraryNameFor } from './extract';
export type { ExtractOptions, ExtractResult } from './extract';
export { canonicalType, extractApiFacts, returnTypeOf } from './facts';
export {
  filterSymbols,
  listSourceFiles,
  SOURCE_EXTENSIONS,
  TRANSLATION_UNIT_EXTENSIONS,
} from './filter';
export type { SymbolSet } from './filter';
export { serializeSpec } from './spec';
export type { ApiEntry, ImplicitEntry, LibrarySpec, ParamEntry } from './spec';
export { listSymbols, parseNmOutput } from './symbols';
export { DEFAULT_TOOLS } from './tools';
export type { ToolNames } from './tools';
