#!/usr/bin/env node
import * as fs from 'fs';
import * as path from 'path';
import { parseArgs } from 'util';

import { extractLibrarySpec } from './extract';
import { serializeSpec } from './spec';
import { DEFAULT_TOOLS } from './tools';

const USAGE = `usage: extract --lib <archive> --src <dir> --out <spec.json>
                [--name <library>] [--nm <tool>] [--demangler <tool>]
                [--frontend <tool>]`;

export const main = (argv: string[]): number => {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        lib: { type: 'string' },
        src: { type: 'string' },
        out: { type: 'string' },
        name: { type: 'string' },
        nm: { type: 'string' },
        demangler: { type: 'string' },
        frontend: { type: 'string' },
        help: { type: 'boolean', short: 'h' },
      },
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  const values = parsed.values;
  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  for (const required of ['lib', 'src', 'out'] as const) {
    if (!values[required]) {
      console.error(`error: --${required} is required`);
      console.error(USAGE);
      return 2;
    }
  }
  try {
    const { spec, symbols } = extractLibrarySpec({
      lib: values.lib!,
      src: values.src!,
      name: values.name,
      tools: {
        nm: values.nm ?? DEFAULT_TOOLS.nm,
        demangler: values.demangler ?? DEFAULT_TOOLS.demangler,
        frontend: values.frontend ?? DEFAULT_TOOLS.frontend,
      },
    });
    const out = values.out!;
    fs.mkdirSync(path.dirname(path.resolve(out)), { recursive: true });
    fs.writeFileSync(out, serializeSpec(spec));
    console.error(
      `${symbols.raw.length} symbols, ${symbols.valid.length} valid, ` +
        `${spec.apis.length} APIs -> ${out}`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
};

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
