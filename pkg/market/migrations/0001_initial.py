# Generated by Django 5.0.14 on 2026-10-18 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('label', models.CharField(blank=True, max_length=120)),
                ('config', models.JSONField(blank=True, default=dict)),
                ('seed', models.BigIntegerField(default=0)),
                ('status', models.CharField(choices=[('completed', 'Completed'), ('partial', 'Completed with failed cells'), ('failed', 'Failed')], default='completed', max_length=16)),
                ('failed_cells', models.PositiveIntegerField(default=0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='ExperimentCell',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('T', models.PositiveIntegerField()),
                ('P0', models.FloatField()),
                ('gamma', models.FloatField()),
                ('alpha', models.FloatField()),
                ('c_bar', models.PositiveIntegerField(blank=True, null=True)),
                ('K', models.PositiveIntegerField(blank=True, null=True)),
                ('upper_bound', models.FloatField(blank=True, null=True)),
                ('pol_revenue', models.FloatField(blank=True, null=True)),
                ('hr1_revenue', models.FloatField(blank=True, null=True)),
                ('hr2_revenue', models.FloatField(blank=True, null=True)),
                ('pol_ratio', models.FloatField(blank=True, null=True)),
                ('hr1_ratio', models.FloatField(blank=True, null=True)),
                ('hr2_ratio', models.FloatField(blank=True, null=True)),
                ('audits_passed', models.BooleanField(default=True)),
                ('error', models.TextField(blank=True)),
                ('metadata', models.JSONField(blank=True, default=dict)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='cells', to='market.experimentrun')),
            ],
            options={
                'ordering': ['run_id', 'T', 'P0', 'gamma', 'alpha', 'id'],
            },
        ),
    ]
