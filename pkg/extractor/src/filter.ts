import * as fs from 'fs';
import * as path from 'path';

import { demangleSymbols, removeModifiers } from './demangle';
import { DEFAULT_TOOLS, ToolNames } from './tools';

export interface SymbolSet {
  raw: string[];
  demangled: string[];
  valid: string[];
}

export const SOURCE_EXTENSIONS = new Set(['.h', '.hpp', '.c', '.cpp', '.cc']);

// Extensions the syntax-tree pass parses; headers reach it via inclusion.
export const TRANSLATION_UNIT_EXTENSIONS = new Set(['.c', '.cpp', '.cc']);

export const listSourceFiles = (
  sourceDir: string,
  extensions: Set<string> = SOURCE_EXTENSIONS,
): string[] => {
  const found: string[] = [];
  const walk = (dir: string) => {
    let entries: fs.Dirent[];
    try {
      entries = fs.readdirSync(dir, { withFileTypes: true });
    } catch (err) {
      console.warn(`warning: skipping unreadable directory ${dir}: ${err}`);
      return;
    }
    const byName = (a: fs.Dirent, b: fs.Dirent) =>
      a.name < b.name ? -1 : a.name > b.name ? 1 : 0;
    for (const entry of entries.sort(byName)) {
      const full = path.join(dir, entry.name);
      if (entry.isDirectory()) {
        walk(full);
      } else if (extensions.has(path.extname(entry.name))) {
        found.push(full);
      }
    }
  };
  walk(sourceDir);
  return found;
};

export const filterSymbols = (
  symbols: string[],
  sourceDir: string,
  tools: ToolNames = DEFAULT_TOOLS,
): SymbolSet => {
  const demangled = demangleSymbols(symbols, tools);
  const candidates = new Set(demangled.map(removeModifiers));
  const valid = new Set<string>();
  for (const file of listSourceFiles(sourceDir)) {
    let content: string;
    try {
      content = fs.readFileSync(file, 'utf8');
    } catch (err) {
      console.warn(`warning: skipping unreadable file ${file}: ${err}`);
      continue;
    }
    for (const name of candidates) {
      if (name && content.includes(name)) {
        valid.add(name);
      }
    }
  }
  return {
    raw: [...symbols],
    demangled,
    valid: [...valid].sort(),
  };
};
