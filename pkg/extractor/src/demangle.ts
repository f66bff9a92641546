import { DEFAULT_TOOLS, runTool, ToolNames } from './tools';

export const demangleSymbols = (
  raw: string[],
  tools: ToolNames = DEFAULT_TOOLS,
): string[] => {
  if (raw.length === 0) {
    return [];
  }
  const result = runTool('demangler', tools.demangler, [], raw.join('\n') + '\n');
  if (result.status !== 0) {
    throw new Error(`${tools.demangler} failed: ${result.stderr.trim()}`);
  }
  const lines = result.stdout.split('\n');
  return raw.map((_, index) => (lines[index] ?? '').trim());
};

// Cut at the first parenthesis outside template brackets: everything after
// is the parameter list (and trailing qualifiers).
const stripParameterList = (name: string): string => {
  let angleDepth = 0;
  for (let i = 0; i < name.length; i++) {
    const ch = name[i];
    if (ch === '<') {
      angleDepth += 1;
    } else if (ch === '>') {
      angleDepth = Math.max(0, angleDepth - 1);
    } else if (ch === '(' && angleDepth === 0) {
      return name.slice(0, i);
    }
  }
  return name;
};

const stripTemplateArguments = (name: string): string => {
  let out = '';
  let angleDepth = 0;
  for (const ch of name) {
    if (ch === '<') {
      angleDepth += 1;
    } else if (ch === '>') {
      angleDepth = Math.max(0, angleDepth - 1);
    } else if (angleDepth === 0) {
      out += ch;
    }
  }
  return out;
};

// "RemoveModifiers": reduce a demangled symbol to its bare function name.
// Template arguments, the parameter list, and qualifiers all go; what is
// left is what source files are searched for.
export const removeModifiers = (demangled: string): string => {
  let name = stripTemplateArguments(stripParameterList(demangled)).trim();
  const lastQualifier = name.lastIndexOf('::');
  if (lastQualifier >= 0) {
    name = name.slice(lastQualifier + 2);
  }
  const lastSpace = name.lastIndexOf(' ');
  if (lastSpace >= 0) {
    name = name.slice(lastSpace + 1);
  }
  return name;
};

// Same reduction but keeping namespace/class qualifiers: used for the
// exact-match-on-qualified-name pass when emitting API facts.
export const qualifiedName = (demangled: string): string => {
  const name = stripTemplateArguments(stripParameterList(demangled)).trim();
  const lastSpace = name.lastIndexOf(' ');
  return lastSpace >= 0 ? name.slice(lastSpace + 1) : name;
};
