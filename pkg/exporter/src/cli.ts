#!/usr/bin/env node
import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { exportProbabilities, EmitKind } from './export'
import { DATASETS, SPLITS, SplitName } from './datasets'

async function main() {
  const argv = await yargs(hideBin(process.argv))
    .scriptName('prob-export')
    .usage('$0 --model FILE --dataset NAME --out FILE.csv [options]')
    .option('model', {
      type: 'string',
      demandOption: true,
      describe: 'pretrained classifier (layers-model JSON file)',
    })
    .option('dataset', {
      type: 'string',
      demandOption: true,
      choices: Object.keys(DATASETS),
      describe: 'built-in image dataset',
    })
    .option('split', {
      type: 'string',
      default: 'test' as SplitName,
      choices: SPLITS as unknown as string[],
      describe: 'which split to run the model over',
    })
    .option('out', {
      type: 'string',
      demandOption: true,
      describe: 'output CSV path',
    })
    .option('emit', {
      type: 'string',
      default: 'probabilities' as EmitKind,
      choices: ['probabilities', 'logits'],
      describe: 'write softmax probabilities or raw model outputs',
    })
    .option('batch-size', {
      type: 'number',
      default: 64,
      describe: 'inference batch size (output is batch-size independent)',
    })
    .strict()
    .help()
    .parseAsync()

  const result = await exportProbabilities({
    model: argv.model,
    dataset: argv.dataset,
    split: argv.split as SplitName,
    out: argv.out,
    emit: argv.emit as EmitKind,
    batchSize: argv['batch-size'],
  })
  console.log(
    `wrote ${result.rows} rows x ${result.classes} classes to ${result.out} (model ${result.modelName})`,
  )
}

main().catch(err => {
  console.error(err instanceof Error ? err.message : String(err))
  process.exit(2)
})
