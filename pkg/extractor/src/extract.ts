import * as path from 'path';

import { extractApiFacts } from './facts';
import { filterSymbols, SymbolSet } from './filter';
import { LibrarySpec } from './spec';
import { listSymbols } from './symbols';
import { DEFAULT_TOOLS, ToolNames } from './tools';

export interface ExtractOptions {
  lib: string;
  src: string;
  name?: string;
  tools?: ToolNames;
}

export const libraryNameFor = (libraryPath: string): string => {
  const stem = path.basename(libraryPath).replace(/\.[^.]*$/, '');
  return stem.startsWith('lib') && stem.length > 3 ? stem.slice(3) : stem;
};

export interface ExtractResult {
  spec: LibrarySpec;
  symbols: SymbolSet;
}

// Algorithm: list the archive's defined external symbols, demangle and
// reduce them, keep those present in source files, then walk each
// translation unit's syntax tree and emit facts for matching functions.
export const extractLibrarySpec = (options: ExtractOptions): ExtractResult => {
  const tools = options.tools ?? DEFAULT_TOOLS;
  const raw = listSymbols(options.lib, tools);
  const symbols = filterSymbols(raw, options.src, tools);
  const apis = extractApiFacts(options.src, symbols, tools);
  return {
    spec: {
      library: options.name ?? libraryNameFor(options.lib),
      apis,
      implicit: [],
      source_root: options.src,
    },
    symbols,
  };
};
