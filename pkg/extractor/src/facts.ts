import * as fs from 'fs';
import * as path from 'path';

import { qualifiedName, removeModifiers } from './demangle';
import { listSourceFiles, SymbolSet, TRANSLATION_UNIT_EXTENSIONS } from './filter';
import { ApiEntry, ParamEntry } from './spec';
import { DEFAULT_TOOLS, runTool, ToolNames } from './tools';

interface AstNode {
  kind?: string;
  name?: string;
  isImplicit?: boolean;
  parentDeclContextId?: string;
  type?: { qualType?: string };
  inner?: AstNode[];
}

const FUNCTION_KINDS = new Set(['FunctionDecl', 'CXXMethodDecl', 'CXXConstructorDecl']);
const SCOPE_KINDS = new Set(['NamespaceDecl', 'CXXRecordDecl']);

// "snappy::Source *" and "char **" spell the same types as
// "snappy::Source*" and "char**"; strip the space before each star.
export const canonicalType = (qualType: string): string =>
  qualType.replace(/\s+/g, ' ').trim().replace(/\s+(?=[*&])/g, '');

// The parameter list is the last balanced parenthesis group; whatever
// precedes it is the return type. Trailing cv/ref qualifiers follow the
// group and drop out with it.
export const returnTypeOf = (functionQualType: string): string => {
  const close = functionQualType.lastIndexOf(')');
  if (close < 0) {
    return canonicalType(functionQualType);
  }
  let depth = 0;
  for (let i = close; i >= 0; i--) {
    if (functionQualType[i] === ')') {
      depth += 1;
    } else if (functionQualType[i] === '(') {
      depth -= 1;
      if (depth === 0) {
        return canonicalType(functionQualType.slice(0, i));
      }
    }
  }
  return canonicalType(functionQualType);
};

const parametersOf = (node: AstNode): ParamEntry[] =>
  (node.inner ?? [])
    .filter((child) => child.kind === 'ParmVarDecl')
    .map((child, index) => ({
      name: child.name || `arg${index}`,
      type: canonicalType(child.type?.qualType ?? ''),
    }));

const renderSignature = (returnType: string, name: string, params: ParamEntry[]): string =>
  `${returnType} ${name}(${params.map((p) => `${p.type} ${p.name}`).join(', ')})`;

const languageFor = (file: string): string =>
  path.extname(file) === '.c' ? 'c' : 'c++';

export const parseTranslationUnit = (
  file: string,
  includeDirs: string[],
  tools: ToolNames = DEFAULT_TOOLS,
): AstNode | null => {
  const args = [
    '-fsyntax-only',
    '-Xclang',
    '-ast-dump=json',
    '-x',
    languageFor(file),
    ...includeDirs.map((dir) => `-I${dir}`),
    file,
  ];
  const result = runTool('C/C++ front-end', tools.frontend, args);
  if (result.status !== 0) {
    console.warn(`warning: skipping unparsable translation unit ${file}`);
    return null;
  }
  try {
    return JSON.parse(result.stdout) as AstNode;
  } catch {
    console.warn(`warning: skipping undumpable translation unit ${file}`);
    return null;
  }
};

const collectFromTree = (
  root: AstNode,
  matches: (qualified: string, bare: string) => boolean,
  sink: Map<string, ApiEntry>,
): void => {
  const walk = (node: AstNode, scope: string[]) => {
    const kind = node.kind ?? '';
    // Out-of-line member definitions reappear at file scope carrying
    // parentDeclContextId; the in-scope declaration already covers them.
    if (
      FUNCTION_KINDS.has(kind) &&
      node.name &&
      !node.isImplicit &&
      !node.parentDeclContextId
    ) {
      const qualified = [...scope, node.name].join('::');
      if (matches(qualified, node.name)) {
        const params = parametersOf(node);
        if (kind !== 'FunctionDecl' && scope.length > 0) {
          // Receiver becomes an explicit first parameter of the class type.
          params.unshift({ name: 'self', type: `${scope.join('::')}*` });
        }
        const returnType = returnTypeOf(node.type?.qualType ?? 'void ()');
        const entry: ApiEntry = {
          name: qualified,
          signature: renderSignature(returnType, qualified, params),
          return_type: returnType,
          params,
        };
        const key = `${entry.name} ${entry.signature}`;
        if (!sink.has(key)) {
          sink.set(key, entry);
        }
      }
    }
    const nextScope =
      SCOPE_KINDS.has(kind) && node.name ? [...scope, node.name] : scope;
    for (const child of node.inner ?? []) {
      walk(child, nextScope);
    }
  };
  walk(root, []);
};

export const extractApiFacts = (
  sourceDir: string,
  symbols: SymbolSet,
  tools: ToolNames = DEFAULT_TOOLS,
): ApiEntry[] => {
  const valid = new Set(symbols.valid);
  // Qualified spellings whose bare form survived the source filter, for
  // exact-match before the bare-name fallback.
  const qualifiedValid = new Set(
    symbols.demangled
      .filter((d) => valid.has(removeModifiers(d)))
      .map(qualifiedName),
  );
  const matches = (qualified: string, bare: string): boolean =>
    qualifiedValid.has(qualified) || valid.has(bare);

  const includeDirs = [sourceDir, ...listSourceDirs(sourceDir)];
  const sink = new Map<string, ApiEntry>();
  for (const file of listSourceFiles(sourceDir, TRANSLATION_UNIT_EXTENSIONS)) {
    const tree = parseTranslationUnit(file, includeDirs, tools);
    if (tree) {
      collectFromTree(tree, matches, sink);
    }
  }
  // Codepoint order, not locale order, so output bytes never depend on
  // the host's collation tables.
  const byText = (a: string, b: string) => (a < b ? -1 : a > b ? 1 : 0);
  return [...sink.values()].sort(
    (a, b) => byText(a.name, b.name) || byText(a.signature, b.signature),
  );
};

const listSourceDirs = (sourceDir: string): string[] => {
  try {
    return fs
      .readdirSync(sourceDir, { withFileTypes: true })
      .filter((entry) => entry.isDirectory())
      .map((entry) => path.join(sourceDir, entry.name))
      .sort();
  } catch {
    return [];
  }
};
