export interface ParamEntry {
  name: string;
  type: string;
}

export interface ApiEntry {
  name: string;
  signature: string;
  return_type: string;
  params: ParamEntry[];
}

export interface ImplicitEntry {
  kind: 'imply' | 'conflict';
  first: string;
  second: string;
}

export interface LibrarySpec {
  library: string;
  apis: ApiEntry[];
  implicit: ImplicitEntry[];
  source_root: string | null;
}

type Json = null | boolean | number | string | Json[] | { [key: string]: Json };

// Key-sorted, two-space-indented JSON: two runs over the same tree must
// produce identical bytes, so nothing may depend on object insertion order.
const dump = (value: Json, level: number): string => {
  const pad = ' '.repeat(2 * level);
  const inner = ' '.repeat(2 * (level + 1));
  if (value === null || typeof value !== 'object') {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    if (value.length === 0) {
      return '[]';
    }
    const items = value.map((item) => inner + dump(item, level + 1));
    return '[\n' + items.join(',\n') + '\n' + pad + ']';
  }
  const keys = Object.keys(value).sort();
  if (keys.length === 0) {
    return '{}';
  }
  const entries = keys.map(
    (key) => inner + JSON.stringify(key) + ': ' + dump(value[key], level + 1),
  );
  return '{\n' + entries.join(',\n') + '\n' + pad + '}';
};

export const serializeSpec = (spec: LibrarySpec): string =>
  dump(spec as unknown as Json, 0) + '\n';
