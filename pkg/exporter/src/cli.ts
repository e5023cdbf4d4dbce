#!/usr/bin/env node
import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'

import { runExport } from './export'

async function main() {
  await yargs(hideBin(process.argv))
    .command(
      'export',
      'run a checkpoint over a dataset and write its logits',
      y =>
        y
          .option('model', { type: 'string', demandOption: true, describe: 'checkpoint id' })
          .option('dataset', {
            type: 'string',
            demandOption: true,
            describe: "'synthetic' or a directory of pre-generated .f32 samples",
          })
          .option('out', { type: 'string', demandOption: true, describe: 'output directory' })
          .option('batch', { type: 'number', default: 32, describe: 'inference batch size' })
          .option('count', { type: 'number', default: 64, describe: 'synthetic sample count' })
          .option('seed', { type: 'number', default: 1, describe: 'weight/data seed' }),
      async args => {
        const result = await runExport({
          model: args.model,
          dataset: args.dataset,
          out: args.out,
          batch: args.batch,
          count: args.count,
          seed: args.seed,
        })
        console.log(
          `wrote ${result.numSamples} x ${result.numClasses} logits -> ${result.manifestPath}`,
        )
      },
    )
    .demandCommand(1, 'specify a command (export)')
    .strict()
    .fail((msg, err) => {
      console.error(err ? `error: ${err.message}` : msg)
      process.exit(err ? 1 : 2)
    })
    .parseAsync()
}

main().catch(e => {
  console.error(`error: ${e.message}`)
  process.exit(1)
})
