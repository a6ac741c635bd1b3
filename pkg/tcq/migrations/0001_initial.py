# Generated by Django 4.2.7 on 2026-10-18 10:12

from django.db import migrations, models
import django.db.models.deletion
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='BenchmarkRun',
            fields=[
                ('run_id', models.UUIDField(default=uuid.uuid4, primary_key=True, serialize=False)),
                ('source_kind', models.CharField(choices=[('uniform', 'Uniform'), ('gaussian', 'Gaussian (clipped)'), ('laplacian', 'Laplacian (clipped)'), ('file', 'Tensor / image file')], max_length=20)),
                ('source_path', models.CharField(blank=True, max_length=500)),
                ('seed', models.BigIntegerField(default=0)),
                ('samples', models.BigIntegerField(default=0)),
                ('seqlen', models.IntegerField(default=0, verbose_name='Sequence Length')),
                ('trellis', models.CharField(max_length=50)),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
                ('status', models.CharField(choices=[('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='running', max_length=20)),
                ('error_message', models.TextField(blank=True)),
            ],
            options={
                'ordering': ['-started_at'],
            },
        ),
        migrations.CreateModel(
            name='RDResult',
            fields=[
                ('result_id', models.UUIDField(default=uuid.uuid4, primary_key=True, serialize=False)),
                ('quantizer', models.CharField(choices=[('TCQ', 'Trellis coded quantizer'), ('SQ', 'Scalar quantizer')], max_length=3)),
                ('rate_bits', models.IntegerField(verbose_name='R')),
                ('bits_per_symbol', models.FloatField()),
                ('header_overhead_bits', models.BigIntegerField(default=0)),
                ('mse', models.FloatField(verbose_name='MSE')),
                ('snr_db', models.FloatField(verbose_name='SNR (dB)')),
                ('psnr_db', models.FloatField(verbose_name='PSNR (dB)')),
                ('entropy_bpp', models.FloatField(blank=True, null=True, verbose_name='Entropy-coded bits/symbol')),
                ('elapsed_ms', models.FloatField(default=0)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='results', to='tcq.benchmarkrun')),
            ],
            options={
                'verbose_name': 'R-D Result',
                'verbose_name_plural': 'R-D Results',
                'ordering': ['run', 'quantizer', 'rate_bits'],
                'unique_together': {('run', 'quantizer', 'rate_bits')},
            },
        ),
    ]
