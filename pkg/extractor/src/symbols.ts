import * as fs from 'fs';

import { DEFAULT_TOOLS, runTool, ToolNames } from './tools';

// BSD-style nm line: optional address, one type letter, symbol name.
const NM_LINE_REGEX = /^(?:[0-9a-fA-F]+\s+)?([A-Za-z])\s+(\S.*)$/;

export const parseNmOutput = (stdout: string): string[] => {
  const names: string[] = [];
  for (const raw of stdout.split('\n')) {
    const line = raw.trim();
    // Archive member headers ("member.o:") and blank lines carry no symbols.
    if (!line || line.endsWith(':')) {
      continue;
    }
    const match = NM_LINE_REGEX.exec(line);
    if (!match) {
      continue;
    }
    const [, typeCode, name] = match;
    // Uppercase codes are external; U is referenced but defined elsewhere.
    if (typeCode === typeCode.toUpperCase() && typeCode !== 'U') {
      names.push(name);
    }
  }
  return names;
};

export const listSymbols = (
  libraryPath: string,
  tools: ToolNames = DEFAULT_TOOLS,
): string[] => {
  fs.accessSync(libraryPath, fs.constants.R_OK);
  const result = runTool('symbol lister', tools.nm, [libraryPath]);
  if (result.status !== 0) {
    throw new Error(`${tools.nm} failed on ${libraryPath}: ${result.stderr.trim()}`);
  }
  return parseNmOutput(result.stdout);
};
